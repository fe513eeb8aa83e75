"""ASGI app exposing any backend implementation over the wire protocol.

Four endpoints: ``GET /capabilities``, ``POST /embed``,
``POST /summarize``, ``POST /paraphrase``. Errors serialize as
``{"code": ..., "message": ...}`` with code in {unreachable, timeout,
capacity, malformed}. The engine's mock and the real model server both
sit behind this same app, which is what keeps them substitutable.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import BackendError


class EmbedBody(BaseModel):
    texts: list[str]


class SummarizeBody(BaseModel):
    text: str
    max_summary_tokens: int


class ParaphraseBody(BaseModel):
    sentence: str
    n_alternatives: int = 1


def create_backend_app(backend) -> FastAPI:
    app = FastAPI(title="model backend")

    @app.exception_handler(BackendError)
    async def _backend_error(request: Request, exc: BackendError):
        status = 413 if exc.code == "capacity" else 502
        return JSONResponse(status_code=status,
                            content={"code": exc.code, "message": exc.message})

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400,
                            content={"code": "malformed", "message": str(exc)})

    @app.get("/capabilities")
    def capabilities():
        caps = backend.capabilities()
        return {"max_input_tokens": caps.max_input_tokens,
                "embedding_dim": caps.embedding_dim,
                "supports": sorted(caps.supports)}

    @app.post("/embed")
    def embed(body: EmbedBody):
        vectors = backend.embed(body.texts)
        return {"vectors": [[float(x) for x in v] for v in vectors]}

    @app.post("/summarize")
    def summarize(body: SummarizeBody):
        return {"sentences": backend.summarize(body.text, body.max_summary_tokens)}

    @app.post("/paraphrase")
    def paraphrase(body: ParaphraseBody):
        return {"alternatives": backend.paraphrase(body.sentence, body.n_alternatives)}

    return app
