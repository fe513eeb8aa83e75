"""Wire-protocol server around the multi-task model.

Endpoints and schemas match the engine's backend contract exactly:
``GET /capabilities``, ``POST /embed`` {texts} -> {vectors},
``POST /summarize`` {text, max_summary_tokens} -> {sentences},
``POST /paraphrase`` {sentence, n_alternatives} -> {alternatives};
errors serialize as {code, message} with code in
{unreachable, timeout, capacity, malformed}.

Generated summaries are clipped to whole sentences under the requested
token budget, and paraphrase outputs are guaranteed non-identical to
the input by deterministic fallbacks, so the structural contract holds
for any underlying weights, trained or random.
"""

from __future__ import annotations

import re
import threading

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .model import ModelConfig, MultiTaskModel

_SENTENCE_SPLIT = re.compile(r"(?<=[.?!])\s+")
_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)

_PARAPHRASE_PREFIXES = ("Rephrased:", "In other words,", "Put differently,")


class CapacityError(RuntimeError):
    pass


def count_tokens(text: str) -> int:
    return len(_TOKEN.findall(text))


def clip_to_budget(sentences: list[str], budget: int) -> list[str]:
    kept: list[str] = []
    used = 0
    for sentence in sentences:
        need = count_tokens(sentence)
        if used + need <= budget:
            kept.append(sentence)
            used += need
    if not kept and sentences:
        words = sentences[0].split()
        kept = [" ".join(words[:budget])] if budget and words else []
    return [s for s in kept if s.strip()]


class RealBackend:
    """Thread-safe protocol implementation over one loaded model."""

    def __init__(self, config: ModelConfig | None = None,
                 model: MultiTaskModel | None = None):
        self.config = config or ModelConfig()
        self.model = model if model is not None else MultiTaskModel(self.config)
        self._lock = threading.Lock()

    def capabilities(self) -> dict:
        return {"max_input_tokens": self.config.max_input_tokens,
                "embedding_dim": self.config.embedding_dim,
                "supports": ["embed", "summarize", "paraphrase"]}

    def embed(self, texts: list[str]) -> list[list[float]]:
        import numpy as np

        with self._lock:
            vectors = self.model.embed(list(texts))
        # Renormalize in float64: the model computes in float32, and the
        # wire contract promises unit norm to much tighter tolerance.
        arr = np.asarray(vectors.tolist(), dtype=np.float64)
        arr /= np.linalg.norm(arr, axis=1, keepdims=True)
        return [[float(x) for x in row] for row in arr]

    def _check_capacity(self, text: str) -> None:
        n = self.model.tokenizer.count_tokens(text)
        if n > self.config.max_input_tokens:
            raise CapacityError(
                f"input has {n} tokens, capacity is {self.config.max_input_tokens}")

    def summarize(self, text: str, max_summary_tokens: int) -> list[str]:
        if not text.strip():
            raise ValueError("summarize input must be nonempty")
        if max_summary_tokens < 1:
            raise ValueError("max_summary_tokens must be positive")
        self._check_capacity(text)
        budget = min(max_summary_tokens, self.config.max_summary_tokens)
        with self._lock:
            generated = self.model.generate_text(text, max_new_tokens=budget)
        sentences = [s for s in _SENTENCE_SPLIT.split(generated) if s.strip()]
        if not sentences:
            # Degenerate generation (e.g. immediate end-of-sequence):
            # fall back to the input's leading sentence, still within budget.
            sentences = [s for s in _SENTENCE_SPLIT.split(text.strip()) if s.strip()][:1]
        return clip_to_budget(sentences, max_summary_tokens)

    def paraphrase(self, sentence: str, n_alternatives: int = 1) -> list[str]:
        if not sentence.strip():
            raise ValueError("paraphrase input must be nonempty")
        if n_alternatives < 1:
            raise ValueError("n_alternatives must be positive")
        self._check_capacity(sentence)
        with self._lock:
            generated = self.model.generate_text(
                sentence, max_new_tokens=max(8, count_tokens(sentence) + 4)).strip()
        alternatives: list[str] = []
        if generated and generated != sentence:
            alternatives.append(generated)
        cycle = 0
        while len(alternatives) < n_alternatives:
            prefix = _PARAPHRASE_PREFIXES[cycle % len(_PARAPHRASE_PREFIXES)]
            suffix = "" if cycle < len(_PARAPHRASE_PREFIXES) else f" (variant {cycle})"
            candidate = f"{prefix} {sentence}{suffix}"
            if candidate != sentence and candidate not in alternatives:
                alternatives.append(candidate)
            cycle += 1
        return alternatives[:n_alternatives]


class EmbedBody(BaseModel):
    texts: list[str]


class SummarizeBody(BaseModel):
    text: str
    max_summary_tokens: int


class ParaphraseBody(BaseModel):
    sentence: str
    n_alternatives: int = 1


def create_app(backend: RealBackend) -> FastAPI:
    app = FastAPI(title="multi-task summary model backend")

    @app.exception_handler(CapacityError)
    async def _capacity(request: Request, exc: CapacityError):
        return JSONResponse(status_code=413,
                            content={"code": "capacity", "message": str(exc)})

    @app.exception_handler(ValueError)
    async def _malformed(request: Request, exc: ValueError):
        return JSONResponse(status_code=400,
                            content={"code": "malformed", "message": str(exc)})

    @app.get("/capabilities")
    def capabilities():
        return backend.capabilities()

    @app.post("/embed")
    def embed(body: EmbedBody):
        return {"vectors": backend.embed(body.texts)}

    @app.post("/summarize")
    def summarize(body: SummarizeBody):
        return {"sentences": backend.summarize(body.text, body.max_summary_tokens)}

    @app.post("/paraphrase")
    def paraphrase(body: ParaphraseBody):
        return {"alternatives": backend.paraphrase(body.sentence, body.n_alternatives)}

    return app
