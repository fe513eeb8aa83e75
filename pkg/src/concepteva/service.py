"""Web API over the engine: documents, concept views, layouts, and sessions.

Documents are content-addressed by the SHA-256 of the uploaded bytes,
so re-uploading is idempotent. Every mutating endpoint persists the
session (atomic temp-file-plus-rename) before responding, which is what
the durability guarantee rests on: after any successful mutating
response, a process restart reconstructs the session exactly.

Per-session mutations are serialized with a lock; reads never block
reads. All payloads carry ``schema_version: 1``.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import persistence
from .backend import make_backend
from .errors import (BackendError, DocumentParseError, EngineError,
                     PersistenceError, SessionLoadError)
from .glyph import build_glyph, section_echo
from .ingest import parse_document
from .layout import LayoutConfig, layout_export
from .ontology import load_gazetteer, top_k_percent
from .pipeline import DocumentAnalysis, analyze_document
from .session import (Candidate, RetrievalConfig, SummarySession,
                      candidate_sentences, coverage_report, customize,
                      generate_initial_summary, paraphrase_sentence)

SCHEMA_VERSION = 1


@dataclass
class ServiceConfig:
    data_dir: Path
    gazetteer_path: Path
    backend: str = "mock"
    listen: str = "127.0.0.1:8076"
    default_k: int = 5
    layout: LayoutConfig = field(default_factory=LayoutConfig)
    max_summary_tokens: int = 120


class FocusBody(BaseModel):
    concepts: list[str] = Field(min_length=1)


class CreateSessionBody(BaseModel):
    doc_id: str
    k: int | None = None
    max_summary_tokens: int | None = None
    chunking: bool = False


class CustomizeBody(BaseModel):
    concepts: list[str] = Field(min_length=1)
    k: int | None = None
    max_summary_tokens: int | None = None


class InsertBody(BaseModel):
    position: int
    concept_id: str
    sentence_index: int
    text: str | None = None


class PatchSentenceBody(BaseModel):
    text: str
    mode: str = "edit"  # or "accept_paraphrase"


class ParaphraseBody(BaseModel):
    n_alternatives: int | None = None


class OrderBody(BaseModel):
    order: list[str]


class ServiceState:
    """Everything the endpoints share: stores, caches, locks."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.data_dir = Path(config.data_dir)
        self.gazetteer = load_gazetteer(Path(config.gazetteer_path).read_bytes())
        self.backend = make_backend(config.backend, self.gazetteer)
        self.documents: dict[str, bytes] = {}
        self.analyses: dict[str, DocumentAnalysis] = {}
        self.sessions: dict[str, SummarySession] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._session_counter = 0
        for session_id in persistence.list_sessions(self.data_dir):
            try:
                self.sessions[session_id] = persistence.load_session(self.data_dir, session_id)
            except SessionLoadError:
                # Keep the service up; requests for this session surface
                # the structured load error naming it.
                continue

    def session_lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def new_session_id(self) -> str:
        with self._locks_guard:
            while True:
                self._session_counter += 1
                candidate = f"sess-{self._session_counter:06d}"
                if candidate not in self.sessions and candidate not in persistence.list_sessions(self.data_dir):
                    return candidate

    def add_document(self, raw: bytes) -> str:
        doc_key = hashlib.sha256(raw).hexdigest()[:16]
        parse_document(raw)  # validate before persisting
        persistence.save_document(self.data_dir, doc_key, raw)
        self.documents[doc_key] = raw
        return doc_key

    def get_analysis(self, doc_key: str) -> DocumentAnalysis:
        if doc_key not in self.analyses:
            raw = self.documents.get(doc_key)
            if raw is None:
                raw = persistence.load_document_bytes(self.data_dir, doc_key)
                self.documents[doc_key] = raw
            doc = parse_document(raw)
            self.analyses[doc_key] = analyze_document(
                doc, self.gazetteer, self.backend, layout_config=self.config.layout)
        return self.analyses[doc_key]

    def get_session(self, session_id: str) -> SummarySession:
        if session_id not in self.sessions:
            self.sessions[session_id] = persistence.load_session(self.data_dir, session_id)
        return self.sessions[session_id]

    def persist(self, session: SummarySession) -> None:
        persistence.save_session(self.data_dir, session)


def _session_payload(session: SummarySession) -> dict:
    return {"schema_version": SCHEMA_VERSION, **session.to_dict()}


def create_app(config: ServiceConfig) -> FastAPI:
    state = ServiceState(config)
    app = FastAPI(title="concept summary service")
    app.state.engine = state

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(DocumentParseError)
    async def _parse_error(request: Request, exc: DocumentParseError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(SessionLoadError)
    async def _session_load_error(request: Request, exc: SessionLoadError):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(PersistenceError)
    async def _persistence_error(request: Request, exc: PersistenceError):
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    @app.exception_handler(BackendError)
    async def _backend_error(request: Request, exc: BackendError):
        return JSONResponse(status_code=502,
                            content={"detail": {"code": exc.code, "message": exc.message}})

    @app.exception_handler(EngineError)
    async def _engine_error(request: Request, exc: EngineError):
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    # -- documents ----------------------------------------------------------

    @app.post("/documents")
    async def post_document(request: Request):
        raw = await request.body()
        doc_key = state.add_document(raw)
        analysis = state.get_analysis(doc_key)
        doc = analysis.doc
        return {"schema_version": SCHEMA_VERSION, "doc_id": doc_key,
                "source_doc_id": doc.doc_id, "title": doc.title,
                "n_sections": len(doc.sections), "n_sentences": doc.n_sentences,
                "token_count": doc.token_count}

    @app.get("/documents/{doc_key}")
    def get_document(doc_key: str):
        analysis = state.get_analysis(doc_key)
        doc = analysis.doc
        return {"schema_version": SCHEMA_VERSION, "doc_id": doc_key,
                "source_doc_id": doc.doc_id, "title": doc.title,
                "token_count": doc.token_count,
                "sections": [{
                    "index": sec.index, "heading": sec.heading,
                    "sentences": [{
                        "global_index": s.global_index, "text": s.text,
                        "char_span": list(s.char_span)} for s in sec.sentences],
                } for sec in doc.sections]}

    @app.get("/documents/{doc_key}/concepts")
    def get_concepts(doc_key: str, metric: str = "frequency", top: float = 100.0):
        analysis = state.get_analysis(doc_key)
        ordered = top_k_percent(analysis.stats, metric, top)
        concepts = []
        for cid in ordered:
            stat = analysis.stats[cid]
            concepts.append({
                "concept_id": cid, "label": analysis.gazetteer.concepts[cid].label,
                "frequency": stat.frequency, "tfidf": stat.tfidf,
                "section_counts": list(stat.section_counts)})
        return {"schema_version": SCHEMA_VERSION, "metric": metric, "top": top,
                "concepts": concepts}

    @app.get("/documents/{doc_key}/layout")
    def get_layout(doc_key: str, metric: str = "frequency"):
        analysis = state.get_analysis(doc_key)
        if analysis.base_layout is None:
            return {"schema_version": SCHEMA_VERSION, "mode": "base", "focus_set": [],
                    "converged": True, "iterations_run": 0, "nodes": []}
        return {"schema_version": SCHEMA_VERSION,
                **layout_export(analysis.base_layout, analysis.graph, analysis.sizes(metric))}

    @app.post("/documents/{doc_key}/layout/focus")
    def post_focus(doc_key: str, body: FocusBody, metric: str = "frequency"):
        analysis = state.get_analysis(doc_key)
        focused = analysis.focused_layout(set(body.concepts))
        return {"schema_version": SCHEMA_VERSION,
                **layout_export(focused, analysis.graph, analysis.sizes(metric))}

    @app.get("/documents/{doc_key}/concepts/{concept_id}/glyph")
    def get_glyph(doc_key: str, concept_id: str, session: str | None = None):
        analysis = state.get_analysis(doc_key)
        summary_texts: list[str] = []
        if session is not None:
            summary_texts = state.get_session(session).summary_texts()
        glyph = build_glyph(concept_id, analysis.stats, summary_texts, analysis.gazetteer)
        return {"schema_version": SCHEMA_VERSION, "concept_id": concept_id,
                "left_bins": list(glyph.left_bins),
                "right_counts": list(glyph.right_counts),
                "right_curve": [[t, d] for t, d in glyph.right_curve],
                "section_echo": [{"section_index": i, "weight": w}
                                 for i, w in section_echo(concept_id, analysis.stats)]}

    # -- sessions -----------------------------------------------------------

    @app.post("/sessions")
    def post_session(body: CreateSessionBody):
        analysis = state.get_analysis(body.doc_id)
        session_id = state.new_session_id()
        retrieval = RetrievalConfig(k=body.k if body.k is not None else state.config.default_k)
        session = generate_initial_summary(
            analysis.doc, state.backend, session_id=session_id, retrieval=retrieval,
            max_summary_tokens=body.max_summary_tokens or state.config.max_summary_tokens,
            chunking=body.chunking)
        session.doc_id = body.doc_id  # sessions reference the content-addressed key
        state.sessions[session_id] = session
        state.persist(session)
        return _session_payload(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return _session_payload(state.get_session(session_id))

    @app.post("/sessions/{session_id}/customize")
    def post_customize(session_id: str, body: CustomizeBody):
        with state.session_lock(session_id):
            session = state.get_session(session_id)
            analysis = state.get_analysis(session.doc_id)
            result = customize(
                session, body.concepts, analysis.doc, analysis.index, state.backend,
                analysis.concept_vectors, k=body.k,
                max_summary_tokens=body.max_summary_tokens or state.config.max_summary_tokens)
            state.persist(session)
            return {"schema_version": SCHEMA_VERSION,
                    "context_indices": list(result.context_indices),
                    "appended_ids": list(result.appended_ids),
                    "empty_context": result.empty_context,
                    "session": session.to_dict()}

    @app.get("/sessions/{session_id}/candidates")
    def get_candidates(session_id: str, concepts: str, k: int | None = None):
        session = state.get_session(session_id)
        analysis = state.get_analysis(session.doc_id)
        requested = [c for c in concepts.split(",") if c]
        result = candidate_sentences(session, requested, analysis.index,
                                     analysis.doc, analysis.concept_vectors, k=k)
        return {"schema_version": SCHEMA_VERSION, "candidates": {
            cid: [{"sentence_index": c.sentence_index, "text": c.text,
                   "similarity": c.similarity} for c in cands]
            for cid, cands in result.by_concept.items()}}

    @app.post("/sessions/{session_id}/sentences")
    def post_sentence(session_id: str, body: InsertBody):
        with state.session_lock(session_id):
            session = state.get_session(session_id)
            analysis = state.get_analysis(session.doc_id)
            sentences = analysis.doc.sentences()
            if not 0 <= body.sentence_index < len(sentences):
                raise ValueError(f"sentence_index {body.sentence_index} out of range")
            text = body.text if body.text is not None else sentences[body.sentence_index].text
            session.insert_sentence(body.position, Candidate(
                concept_id=body.concept_id, sentence_index=body.sentence_index,
                text=text, similarity=0.0))
            state.persist(session)
            return _session_payload(session)

    @app.patch("/sessions/{session_id}/sentences/{sentence_id}")
    def patch_sentence(session_id: str, sentence_id: str, body: PatchSentenceBody):
        with state.session_lock(session_id):
            session = state.get_session(session_id)
            if body.mode == "edit":
                session.edit_sentence(sentence_id, body.text)
            elif body.mode == "accept_paraphrase":
                session.accept_paraphrase(sentence_id, body.text)
            else:
                raise ValueError(f"mode must be 'edit' or 'accept_paraphrase', got {body.mode!r}")
            state.persist(session)
            return _session_payload(session)

    @app.post("/sessions/{session_id}/sentences/{sentence_id}/paraphrase")
    def post_paraphrase(session_id: str, sentence_id: str, body: ParaphraseBody | None = None):
        session = state.get_session(session_id)
        n = body.n_alternatives if body is not None else None
        alternatives = paraphrase_sentence(session, sentence_id, state.backend, n)
        return {"schema_version": SCHEMA_VERSION, "sentence_id": sentence_id,
                "alternatives": alternatives}

    @app.put("/sessions/{session_id}/order")
    def put_order(session_id: str, body: OrderBody):
        with state.session_lock(session_id):
            session = state.get_session(session_id)
            session.reorder(body.order)
            state.persist(session)
            return _session_payload(session)

    @app.delete("/sessions/{session_id}/sentences/{sentence_id}")
    def delete_sentence(session_id: str, sentence_id: str):
        with state.session_lock(session_id):
            session = state.get_session(session_id)
            session.delete_sentence(sentence_id)
            state.persist(session)
            return _session_payload(session)

    @app.get("/sessions/{session_id}/coverage")
    def get_coverage(session_id: str, metric: str = "frequency", top: float = 100.0):
        session = state.get_session(session_id)
        analysis = state.get_analysis(session.doc_id)
        report = coverage_report(session, analysis.stats, analysis.gazetteer, metric, top)
        return {"schema_version": SCHEMA_VERSION, "metric": metric, "top": top,
                "coverage": [{"concept_id": cid, "frequency": freq, "in_summary": present}
                             for cid, freq, present in report]}

    @app.get("/sessions/{session_id}/export")
    def get_export(session_id: str):
        session = state.get_session(session_id)
        return {"schema_version": SCHEMA_VERSION,
                "summary": session.export_text(),
                "provenance": session.export_provenance()}

    return app
