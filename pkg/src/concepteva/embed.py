"""Embedding utilities, the deterministic mock embedder, and an exact k-NN index.

The index is flat and exact: documents here are desk-scale (at most a
few thousand sentences), so a full scan is cheap and makes brute-force
oracle testing possible. All vectors are unit L2-norm float64, so
cosine similarity is a plain dot product.

The mock embedder hashes each token into one of ``d`` buckets with a
+/-1 sign drawn from a second independent hash stream, sums over the
token multiset, and L2-normalizes. It is a pure function of
(token multiset, seed, d); empty text maps to the basis vector e0.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .errors import BackendError, ProtocolError
from .ingest import SourceDocument, tokenize

UNIT_NORM_TOL = 1e-9
DEFAULT_MOCK_DIM = 64


@dataclass(frozen=True)
class RetrievalConfig:
    """How many nearest sentences each concept query retrieves."""

    k: int = 5

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


class EmbeddingProvider(Protocol):
    def capabilities(self): ...

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]: ...


def l2_normalize(v: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / norm


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return float(np.dot(u, v))


def _token_hash(token: str, seed: int, stream: bytes) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8,
                             key=seed.to_bytes(8, "little", signed=True),
                             person=stream.ljust(16, b"\0")).digest()
    return int.from_bytes(digest, "little")


def mock_embed_text(text: str, d: int = DEFAULT_MOCK_DIM, seed: int = 0) -> np.ndarray:
    """Deterministic bag-of-tokens embedding; see module docstring for the scheme."""
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    tokens = tokenize(text)
    v = np.zeros(d, dtype=np.float64)
    if not tokens:
        v[0] = 1.0
        return v
    for token in tokens:
        bucket = _token_hash(token, seed, b"bucket") % d
        sign = 1.0 if _token_hash(token, seed, b"sign") % 2 == 0 else -1.0
        v[bucket] += sign
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        # Opposite-signed tokens can cancel exactly; fall back to e0.
        v[0] = 1.0
        return v
    return v / norm


def embed_texts(provider: EmbeddingProvider, texts: Sequence[str]) -> list[np.ndarray]:
    """Embed ``texts`` through ``provider`` and validate the response.

    One unit-norm vector per text, dimension equal to the provider's
    advertised capability. Violations raise
    :class:`~concepteva.errors.ProtocolError`.
    """
    if not texts:
        raise ValueError("texts must be a nonempty list")
    caps = provider.capabilities()
    vectors = provider.embed(list(texts))
    if len(vectors) != len(texts):
        raise ProtocolError(f"expected {len(texts)} vectors, got {len(vectors)}")
    out: list[np.ndarray] = []
    for i, vec in enumerate(vectors):
        arr = np.asarray(vec, dtype=np.float64)
        if arr.shape != (caps.embedding_dim,):
            raise ProtocolError(
                f"vector {i} has dimension {arr.shape}, capability says {caps.embedding_dim}")
        if abs(float(np.linalg.norm(arr)) - 1.0) > UNIT_NORM_TOL:
            raise ProtocolError(f"vector {i} is not unit-norm")
        out.append(arr)
    return out


class SentenceIndex:
    """Exact nearest-neighbor index over one document's sentence embeddings."""

    def __init__(self, doc_id: str, dimension: int,
                 entries: Sequence[tuple[int, np.ndarray]]):
        self.doc_id = doc_id
        self.dimension = dimension
        self.entries = [(int(i), np.asarray(v, dtype=np.float64)) for i, v in entries]
        self.entries.sort(key=lambda e: e[0])
        for idx, vec in self.entries:
            if vec.shape != (dimension,):
                raise ValueError(f"entry {idx} has dimension {vec.shape}, index is {dimension}")
        self._indices = np.array([i for i, _ in self.entries], dtype=np.int64)
        self._matrix = (np.stack([v for _, v in self.entries])
                        if self.entries else np.zeros((0, dimension)))

    def __len__(self) -> int:
        return len(self.entries)


def build_sentence_index(doc: SourceDocument, provider: EmbeddingProvider) -> SentenceIndex:
    """Embed every sentence of ``doc`` in order and index the result."""
    caps = provider.capabilities()
    sentences = doc.sentences()
    if not sentences:
        return SentenceIndex(doc.doc_id, caps.embedding_dim, [])
    try:
        vectors = embed_texts(provider, [s.text for s in sentences])
    except ProtocolError as exc:
        raise ProtocolError(f"indexing {doc.doc_id}: {exc.message}") from exc
    except BackendError as exc:
        raise BackendError(exc.code, f"indexing {doc.doc_id}: {exc.message}") from exc
    return SentenceIndex(doc.doc_id, caps.embedding_dim,
                         [(s.global_index, v) for s, v in zip(sentences, vectors)])


def knn(index: SentenceIndex, query: np.ndarray, k: int) -> list[tuple[int, float]]:
    """Exact top-k sentences by cosine similarity, descending.

    Ties break toward the lower sentence index; returns
    ``min(k, len(index))`` items.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    query = np.asarray(query, dtype=np.float64)
    if query.shape != (index.dimension,):
        raise ValueError(f"query dimension {query.shape} does not match index ({index.dimension})")
    if len(index) == 0:
        return []
    sims = index._matrix @ query
    order = np.lexsort((index._indices, -sims))[:k]
    return [(int(index._indices[i]), float(sims[i])) for i in order]
