"""2D projection of concept embeddings.

PCA is implemented natively and exactly (eigendecomposition of the
covariance for d <= 256, Gram-matrix trick above that). Stochastic
methods such as t-SNE or UMAP are not implemented here; they attach as
external providers and are validated against the same output contract.

Sign convention: within each principal component, the entry of largest
absolute value is made positive (first such entry on ties), which
removes eigenvector sign ambiguity and makes projections reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Protocol

import numpy as np

from .errors import ProtocolError

GRAM_THRESHOLD_DIM = 256
_RANK_TOL = 1e-10


@dataclass(frozen=True)
class Projection2D:
    method: str
    coords: dict[str, tuple[float, float]]


class ProjectionProvider(Protocol):
    def project(self, vectors: Mapping[str, np.ndarray]) -> Mapping[str, tuple[float, float]]: ...


def _fix_sign(component: np.ndarray) -> np.ndarray:
    pivot = int(np.argmax(np.abs(component)))
    return -component if component[pivot] < 0 else component


def _principal_components(centered: np.ndarray) -> np.ndarray:
    """Top-2 unit principal components as columns; near-null components are zeroed."""
    n, d = centered.shape
    if d <= GRAM_THRESHOLD_DIM:
        cov = centered.T @ centered / max(n - 1, 1)
        eigvals, eigvecs = np.linalg.eigh(cov)
        order = np.argsort(eigvals)[::-1]
        eigvals, eigvecs = eigvals[order], eigvecs[:, order]
        components = eigvecs[:, :2].T.copy()
        lams = eigvals[:2]
    else:
        gram = centered @ centered.T
        eigvals, eigvecs = np.linalg.eigh(gram)
        order = np.argsort(eigvals)[::-1]
        eigvals, eigvecs = eigvals[order], eigvecs[:, order]
        components = np.zeros((2, d))
        lams = np.zeros(2)
        for i in range(min(2, n)):
            lam = eigvals[i]
            lams[i] = lam / max(n - 1, 1)
            if lam > 0:
                components[i] = centered.T @ eigvecs[:, i] / np.sqrt(lam)

    out = np.zeros((2, d))
    lam_max = float(max(lams.max(initial=0.0), 0.0))
    threshold = lam_max * _RANK_TOL
    for i in range(min(2, len(lams))):
        if lams[i] > threshold and lams[i] > 0:
            out[i] = _fix_sign(components[i])
    return out.T


def pca_project(vectors: Mapping[str, np.ndarray]) -> Projection2D:
    """Mean-centered data projected onto the top-2 principal components.

    Components are ordered by descending eigenvalue; rank-deficient
    directions (fewer than 3 distinct points, or intrinsic rank < 2)
    are zero-filled, so degenerate inputs land at the origin.
    """
    if not vectors:
        raise ValueError("need at least one vector")
    ids = sorted(vectors)
    matrix = np.stack([np.asarray(vectors[cid], dtype=np.float64) for cid in ids])
    if matrix.ndim != 2:
        raise ValueError("vectors must share one fixed dimension")
    centered = matrix - matrix.mean(axis=0)
    components = _principal_components(centered)
    coords = centered @ components
    return Projection2D(method="pca", coords={
        cid: (float(coords[i, 0]), float(coords[i, 1])) for i, cid in enumerate(ids)})


def project(vectors: Mapping[str, np.ndarray], method: str,
            provider: ProjectionProvider | None = None) -> Projection2D:
    """Dispatch to PCA or a registered external provider and validate the output."""
    if method == "pca":
        return pca_project(vectors)
    if method.startswith("external:"):
        if provider is None:
            raise ValueError(f"no projection provider registered for {method!r}")
        raw = provider.project(vectors)
        coords: dict[str, tuple[float, float]] = {}
        for cid in vectors:
            if cid not in raw:
                raise ProtocolError(f"projection provider omitted concept {cid!r}")
            x, y = raw[cid]
            if not (np.isfinite(x) and np.isfinite(y)):
                raise ProtocolError(f"projection provider returned non-finite coordinate for {cid!r}")
            coords[cid] = (float(x), float(y))
        return Projection2D(method=method, coords=coords)
    raise ValueError(f"unknown projection method {method!r}")
