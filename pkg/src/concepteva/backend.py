"""Model-backend contract: capabilities / embed / summarize / paraphrase.

Two implementations ship here. :class:`MockBackend` is fully
deterministic and carries the whole engine test suite; it selects
summary sentences extractively by concept tf-idf, paraphrases by fixed
text transforms, and embeds with the hashing scheme from
:mod:`concepteva.embed`. :class:`HttpBackend` speaks the same contract
over HTTP to a real model server and validates every response
structurally (dimensions, norms, token budgets, non-identity of
paraphrases).

Idempotent calls (capabilities, embed) are retried up to 2 times with
backoff; generation calls (summarize, paraphrase) are never retried
automatically because they may be expensive and are not idempotent.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

import httpx
import numpy as np

from .errors import BackendError, CapacityError, ProtocolError
from .ingest import SourceDocument, parse_document, segment_sentences, tokenize
from .embed import DEFAULT_MOCK_DIM, UNIT_NORM_TOL, mock_embed_text
from .ontology import Gazetteer, compute_stats, spot_concepts, spot_tokens

MAX_INPUT_TOKENS = 16384
ALL_FUNCTIONS = frozenset({"embed", "summarize", "paraphrase"})
_RETRIES = 2

_PARAPHRASE_PREFIXES = (
    "Rephrased: ",
    "In other words, ",
    "Put differently, ",
    "To restate it, ",
)


@dataclass(frozen=True)
class BackendCapabilities:
    max_input_tokens: int
    embedding_dim: int
    supports: frozenset[str]

    def __post_init__(self):
        if self.max_input_tokens < 1:
            raise ValueError("max_input_tokens must be positive")
        if self.embedding_dim < 1:
            raise ValueError("embedding_dim must be positive")


def count_tokens(text: str) -> int:
    return len(tokenize(text))


class MockBackend:
    """Deterministic stand-in for the model server.

    Summarization is extractive: the input is segmented into sentences,
    each scored by the summed tf-idf of the distinct gazetteer concepts
    it contains (sentence token count when no gazetteer is configured),
    and the highest-scoring sentences are taken greedily -- ties to the
    earlier sentence -- until the token budget is exhausted, then
    returned in their original order. When ``doc_context`` accompanies a
    request, tf-idf comes from that document's section structure;
    otherwise the input text is treated as a single section.
    """

    def __init__(self, gazetteer: Gazetteer | None = None, *,
                 dim: int = DEFAULT_MOCK_DIM, seed: int = 0,
                 max_input_tokens: int = MAX_INPUT_TOKENS):
        self.gazetteer = gazetteer
        self.dim = dim
        self.seed = seed
        self.max_input_tokens = max_input_tokens

    def capabilities(self) -> BackendCapabilities:
        return BackendCapabilities(max_input_tokens=self.max_input_tokens,
                                   embedding_dim=self.dim, supports=ALL_FUNCTIONS)

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [mock_embed_text(t, self.dim, self.seed) for t in texts]

    def _tfidf_by_concept(self, text: str, doc_context: SourceDocument | None) -> dict[str, float]:
        assert self.gazetteer is not None
        if doc_context is None:
            doc_context = parse_document(_single_section_payload(text))
        stats = compute_stats(spot_concepts(doc_context, self.gazetteer), doc_context)
        return {cid: s.tfidf for cid, s in stats.items()}

    def summarize(self, text: str, max_summary_tokens: int,
                  doc_context: SourceDocument | None = None) -> list[str]:
        if not text.strip():
            raise ValueError("summarize input must be nonempty")
        if max_summary_tokens < 1:
            raise ValueError("max_summary_tokens must be positive")
        if count_tokens(text) > self.max_input_tokens:
            raise CapacityError(
                f"input has {count_tokens(text)} tokens, capacity is {self.max_input_tokens}")

        sentences = [text[a:b] for a, b in segment_sentences(text)]
        if self.gazetteer is not None:
            tfidf = self._tfidf_by_concept(text, doc_context)
            scores = []
            for sent in sentences:
                concepts = {cid for cid, _, _ in spot_tokens(tokenize(sent), self.gazetteer)}
                scores.append(sum(tfidf.get(cid, 0.0) for cid in concepts))
        else:
            scores = [float(len(tokenize(sent))) for sent in sentences]

        order = sorted(range(len(sentences)), key=lambda i: (-scores[i], i))
        budget = max_summary_tokens
        chosen: set[int] = set()
        for i in order:
            need = len(tokenize(sentences[i]))
            if need <= budget:
                chosen.add(i)
                budget -= need
        return [sentences[i] for i in sorted(chosen)]

    def paraphrase(self, sentence: str, n_alternatives: int | None = None) -> list[str]:
        if not sentence.strip():
            raise ValueError("paraphrase input must be nonempty")
        n = 1 if n_alternatives is None else n_alternatives
        if n < 1:
            raise ValueError("n_alternatives must be positive")

        alternatives: list[str] = []
        body = sentence.strip()
        tail = ""
        if body and body[-1] in ".?!":
            body, tail = body[:-1], body[-1]
        comma = body.find(",")
        if comma != -1:
            left, right = body[:comma].strip(), body[comma + 1:].strip()
            if left and right:
                swapped = f"{right}, {left}{tail}"
                if swapped != sentence:
                    alternatives.append(swapped)
        cycle = 0
        while len(alternatives) < n:
            prefix = _PARAPHRASE_PREFIXES[cycle % len(_PARAPHRASE_PREFIXES)]
            suffix = "" if cycle < len(_PARAPHRASE_PREFIXES) else f" (variant {cycle})"
            candidate = f"{prefix}{sentence}{suffix}"
            if candidate != sentence and candidate not in alternatives:
                alternatives.append(candidate)
            cycle += 1
        return alternatives[:n]


def _single_section_payload(text: str) -> bytes:
    import json

    return json.dumps({"doc_id": "inline", "title": "",
                       "sections": [{"heading": "", "paragraphs": [text]}]}).encode("utf-8")


class HttpBackend:
    """Protocol client for a remote backend; validates every response."""

    def __init__(self, base_url: str, *, timeout: float = 60.0,
                 retry_backoff: float = 0.25, transport: httpx.BaseTransport | None = None):
        self.base_url = base_url.rstrip("/")
        self.retry_backoff = retry_backoff
        self._client = httpx.Client(base_url=self.base_url, timeout=timeout,
                                    transport=transport)
        self._caps: BackendCapabilities | None = None

    def close(self) -> None:
        self._client.close()

    def _request(self, method: str, path: str, payload: dict | None, *, retry: bool) -> dict:
        attempts = 1 + (_RETRIES if retry else 0)
        last: BackendError | None = None
        for attempt in range(attempts):
            if attempt:
                time.sleep(self.retry_backoff * attempt)
            try:
                response = self._client.request(method, path, json=payload)
            except httpx.TimeoutException as exc:
                last = BackendError("timeout", f"{path}: {exc}")
                continue
            except httpx.TransportError as exc:
                last = BackendError("unreachable", f"{path}: {exc}")
                continue
            if response.status_code >= 400:
                raise _error_from_response(path, response)
            try:
                return response.json()
            except ValueError as exc:
                raise ProtocolError(f"{path}: response is not JSON: {exc}") from exc
        assert last is not None
        raise last

    def capabilities(self) -> BackendCapabilities:
        if self._caps is None:
            data = self._request("GET", "/capabilities", None, retry=True)
            try:
                self._caps = BackendCapabilities(
                    max_input_tokens=int(data["max_input_tokens"]),
                    embedding_dim=int(data["embedding_dim"]),
                    supports=frozenset(data["supports"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ProtocolError(f"bad capabilities payload: {exc}") from exc
        return self._caps

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        data = self._request("POST", "/embed", {"texts": list(texts)}, retry=True)
        vectors = data.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise ProtocolError(f"expected {len(texts)} vectors")
        dim = self.capabilities().embedding_dim
        out = []
        for i, values in enumerate(vectors):
            arr = np.asarray(values, dtype=np.float64)
            if arr.shape != (dim,):
                raise ProtocolError(f"vector {i}: dimension {arr.shape} != {dim}")
            if abs(float(np.linalg.norm(arr)) - 1.0) > UNIT_NORM_TOL:
                raise ProtocolError(f"vector {i} is not unit-norm")
            out.append(arr)
        return out

    def summarize(self, text: str, max_summary_tokens: int,
                  doc_context: SourceDocument | None = None) -> list[str]:
        # doc_context is an in-process hint only; it never crosses the wire.
        data = self._request("POST", "/summarize",
                             {"text": text, "max_summary_tokens": max_summary_tokens},
                             retry=False)
        sentences = data.get("sentences")
        if not isinstance(sentences, list) or any(not isinstance(s, str) or not s for s in sentences):
            raise ProtocolError("summarize response must be a list of nonempty strings")
        total = sum(count_tokens(s) for s in sentences)
        if total > max_summary_tokens:
            raise ProtocolError(f"summary has {total} tokens, budget was {max_summary_tokens}")
        return sentences

    def paraphrase(self, sentence: str, n_alternatives: int | None = None) -> list[str]:
        n = 3 if n_alternatives is None else n_alternatives
        data = self._request("POST", "/paraphrase",
                             {"sentence": sentence, "n_alternatives": n}, retry=False)
        alts = data.get("alternatives")
        if not isinstance(alts, list) or not 1 <= len(alts) <= n:
            raise ProtocolError(f"expected between 1 and {n} alternatives")
        if any(not isinstance(a, str) or not a for a in alts):
            raise ProtocolError("alternatives must be nonempty strings")
        if any(a == sentence for a in alts):
            raise ProtocolError("an alternative equals the input sentence")
        return alts


def _error_from_response(path: str, response: httpx.Response) -> BackendError:
    try:
        detail = response.json()
        if isinstance(detail, dict) and "detail" in detail:
            detail = detail["detail"]
        code = detail["code"]
        message = detail["message"]
    except Exception:
        return BackendError("malformed", f"{path}: HTTP {response.status_code}")
    if code == "capacity":
        return CapacityError(f"{path}: {message}")
    if code in ("unreachable", "timeout", "malformed"):
        return BackendError(code, f"{path}: {message}")
    return BackendError("malformed", f"{path}: unknown error code {code!r}: {message}")


def make_backend(spec: str, gazetteer: Gazetteer | None = None):
    """Build a backend from a config string: ``mock`` or a base URL."""
    if spec == "mock":
        return MockBackend(gazetteer)
    if spec.startswith("http://") or spec.startswith("https://"):
        return HttpBackend(spec)
    raise ValueError(f"backend must be 'mock' or an http(s) URL, got {spec!r}")
