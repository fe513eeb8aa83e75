"""Context-augmented force-directed concept layout and the focus-on transform.

The projection coordinates act as spring anchors, so the converged
layout keeps the semantic arrangement while co-occurrence edges pull
frequently co-mentioned concepts together. Three forces act on each
node:

* edge attraction  ``attract_k * ln(1 + count) * (dist - L0)`` along each edge,
* pairwise repulsion  ``repulse_k / dist^2``,
* anchor spring  ``anchor_k * (anchor - pos)``.

Per-step displacement is capped at a step size that cools geometrically,
and the run stops once the largest displacement drops below ``epsilon``.
Everything is deterministic: nodes are processed in lexicographic
concept-id order and coincident points are separated by a seeded jitter.

Focus-on is a deterministic re-mapping, not a second simulation: x is
preserved exactly, focused concepts move to y = 0.95, and the rest are
ranked by relevance onto [0.05, 0.85].
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import AbstractSet, Iterable, Mapping, Sequence

import numpy as np

from .ontology import CooccurrenceGraph

FOCUS_TOP_Y = 0.95
FOCUS_BAND = (0.05, 0.85)
INIT_MARGIN = 0.05
_COINCIDENT_EPS = 1e-12
_JITTER = 1e-6


@dataclass(frozen=True)
class LayoutConfig:
    attract_k: float = 0.02
    repulse_k: float = 0.0005
    anchor_k: float = 0.05
    rest_length: float = 0.05
    step0: float = 0.05
    cooling: float = 0.95
    max_iters: int = 500
    epsilon: float = 1e-4
    seed: int = 0
    relevance_blend: float = 0.5

    def __post_init__(self):
        if self.attract_k <= 0:
            raise ValueError("attract_k must be positive")
        if self.repulse_k < 0:
            raise ValueError("repulse_k must be nonnegative")
        if self.anchor_k < 0:
            raise ValueError("anchor_k must be nonnegative")
        if self.rest_length <= 0:
            raise ValueError("rest_length must be positive")
        if self.step0 <= 0:
            raise ValueError("step0 must be positive")
        if not 0 < self.cooling < 1:
            raise ValueError("cooling must be in (0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not 0 <= self.relevance_blend <= 1:
            raise ValueError("relevance_blend must be in [0, 1]")


@dataclass(frozen=True)
class LayoutState:
    positions: dict[str, tuple[float, float]]
    anchors: dict[str, tuple[float, float]]
    iterations_run: int = 0
    converged: bool = False
    mode: str = "base"
    focus_set: frozenset[str] = field(default_factory=frozenset)


def init_layout(projection_coords: Mapping[str, tuple[float, float]]) -> LayoutState:
    """Min-max rescale projected coordinates into [0.05, 0.95]^2.

    A degenerate axis (zero range) maps to 0.5. The rescaled points
    double as the anchor positions for :func:`run_layout`.
    """
    if not projection_coords:
        raise ValueError("projection must be nonempty")
    ids = sorted(projection_coords)
    pts = np.array([projection_coords[cid] for cid in ids], dtype=np.float64)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    scaled = np.full_like(pts, 0.5)
    span = 1.0 - 2 * INIT_MARGIN
    for axis in range(2):
        if hi[axis] > lo[axis]:
            scaled[:, axis] = INIT_MARGIN + span * (pts[:, axis] - lo[axis]) / (hi[axis] - lo[axis])
    scaled = np.clip(scaled, INIT_MARGIN, 1.0 - INIT_MARGIN)  # absorb rescale round-off
    positions = {cid: (float(scaled[i, 0]), float(scaled[i, 1])) for i, cid in enumerate(ids)}
    return LayoutState(positions=positions, anchors=dict(positions))


def _jitter_direction(seed: int, i: int, j: int) -> np.ndarray:
    payload = f"{seed}:{i}:{j}".encode()
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    angle = 2 * math.pi * (int.from_bytes(digest, "little") / 2**64)
    return np.array([math.cos(angle), math.sin(angle)])


def run_layout(init: LayoutState, graph: CooccurrenceGraph, cfg: LayoutConfig) -> LayoutState:
    """Iterate the force model from ``init`` until convergence or ``max_iters``.

    Deterministic given (init, graph, cfg): repeated runs are
    bitwise-identical. Positions stay clamped to the unit square at
    every iteration, and ``converged`` is true iff the final max
    displacement fell below ``epsilon``.
    """
    ids = sorted(init.positions)
    unknown = set(graph.nodes) - set(ids)
    if unknown:
        raise ValueError(f"graph nodes missing from layout: {sorted(unknown)}")
    index_of = {cid: i for i, cid in enumerate(ids)}
    n = len(ids)
    pos = np.array([init.positions[cid] for cid in ids], dtype=np.float64)
    anchors = np.array([init.anchors.get(cid, init.positions[cid]) for cid in ids], dtype=np.float64)
    edges = [(index_of[a], index_of[b], math.log1p(count))
             for (a, b), count in sorted(graph.edges.items())]

    step = cfg.step0
    iterations = 0
    converged = False
    for _ in range(cfg.max_iters):
        forces = cfg.anchor_k * (anchors - pos)

        if n > 1:
            diff = pos[:, None, :] - pos[None, :, :]          # diff[i, j] = pos_i - pos_j
            dist = np.linalg.norm(diff, axis=2)
            coincident = (dist < _COINCIDENT_EPS) & ~np.eye(n, dtype=bool)
            if coincident.any():
                for i, j in zip(*np.nonzero(np.triu(coincident))):
                    direction = _jitter_direction(cfg.seed, int(i), int(j))
                    diff[i, j] = _JITTER * direction
                    diff[j, i] = -diff[i, j]
                    dist[i, j] = dist[j, i] = _JITTER
            np.fill_diagonal(dist, 1.0)  # inert: diagonal diff is zero
            inv3 = dist ** -3
            np.fill_diagonal(inv3, 0.0)
            forces += cfg.repulse_k * np.einsum("ij,ijk->ik", inv3, diff)

            for a, b, weight in edges:
                delta = pos[b] - pos[a]
                d = float(np.linalg.norm(delta))
                if d < _COINCIDENT_EPS:
                    delta = _JITTER * _jitter_direction(cfg.seed, a, b)
                    d = _JITTER
                pull = cfg.attract_k * weight * (d - cfg.rest_length) / d
                forces[a] += pull * delta
                forces[b] -= pull * delta

        norms = np.linalg.norm(forces, axis=1)
        scale = np.ones(n)
        moving = norms > 0
        scale[moving] = np.minimum(1.0, step / norms[moving])
        new_pos = np.clip(pos + forces * scale[:, None], 0.0, 1.0)
        max_disp = float(np.max(np.linalg.norm(new_pos - pos, axis=1))) if n else 0.0
        pos = new_pos
        iterations += 1
        step *= cfg.cooling
        if max_disp < cfg.epsilon:
            converged = True
            break

    positions = {cid: (float(pos[i, 0]), float(pos[i, 1])) for i, cid in enumerate(ids)}
    return LayoutState(positions=positions, anchors=dict(init.anchors),
                       iterations_run=iterations, converged=converged, mode="base")


def relevance(concept_id: str, focus: AbstractSet[str],
              embeddings: Mapping[str, np.ndarray], graph: CooccurrenceGraph,
              blend: float) -> float:
    """Blend of semantic similarity and co-occurrence strength to a focus set.

    ``blend * max_f (cos(e_c, e_f) + 1) / 2  +  (1 - blend) * max_f w(c, f) / w_max``
    with ``w_max`` the graph's largest edge count (the term is 0 in an
    edgeless graph). Focused concepts have relevance 1 by definition.
    """
    if not focus:
        raise ValueError("focus set must be nonempty")
    if concept_id in focus:
        return 1.0
    if concept_id not in embeddings:
        raise ValueError(f"no embedding for concept {concept_id!r}")
    missing = [f for f in focus if f not in embeddings]
    if missing:
        raise ValueError(f"no embedding for focus concepts {sorted(missing)}")

    vec = embeddings[concept_id]
    semantic = max((float(np.dot(vec, embeddings[f])) + 1.0) / 2.0 for f in focus)
    w_max = graph.max_count()
    contextual = max(graph.count(concept_id, f) for f in focus) / w_max if w_max else 0.0
    return min(1.0, max(0.0, blend * semantic + (1 - blend) * contextual))


def focus_rank(concept_ids: Iterable[str], focus: AbstractSet[str],
               embeddings: Mapping[str, np.ndarray], graph: CooccurrenceGraph,
               blend: float) -> list[str]:
    """Non-focused concepts ordered by descending relevance, ties by ascending id."""
    scored = [(cid, relevance(cid, focus, embeddings, graph, blend))
              for cid in concept_ids if cid not in focus]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return [cid for cid, _ in scored]


def focus_on(state: LayoutState, focus: AbstractSet[str],
             embeddings: Mapping[str, np.ndarray], graph: CooccurrenceGraph,
             cfg: LayoutConfig) -> LayoutState:
    """Lift the focus set to the top of the view, rank the rest by relevance.

    Horizontal positions are preserved exactly. Focused concepts land at
    y = 0.95; the rest map linearly onto [0.05, 0.85] with the most
    relevant at 0.85 (a single non-focused concept also lands at 0.85).
    """
    if not focus:
        raise ValueError("focus set must be nonempty")
    unknown = set(focus) - set(state.positions)
    if unknown:
        raise ValueError(f"unknown concepts in focus set: {sorted(unknown)}")

    positions: dict[str, tuple[float, float]] = {}
    for cid in focus:
        positions[cid] = (state.positions[cid][0], FOCUS_TOP_Y)

    ranked = focus_rank(state.positions, focus, embeddings, graph, cfg.relevance_blend)
    low, high = FOCUS_BAND
    m = len(ranked)
    for rank_pos, cid in enumerate(ranked):
        y = high if m == 1 else high - (high - low) * rank_pos / (m - 1)
        positions[cid] = (state.positions[cid][0], y)

    return replace(state, positions=positions, mode="focus", focus_set=frozenset(focus))


def layout_export(state: LayoutState, graph: CooccurrenceGraph,
                  sizes: Mapping[str, float]) -> dict:
    """Serializable layout payload for the UI and the offline renderer."""
    nodes = []
    for cid in sorted(state.positions):
        x, y = state.positions[cid]
        edges = [{"other": other, "count": count}
                 for other, count in sorted(graph.neighbors(cid).items())]
        nodes.append({"concept_id": cid, "x": x, "y": y,
                      "size": float(sizes.get(cid, 0.0)), "edges": edges})
    return {"mode": state.mode, "focus_set": sorted(state.focus_set),
            "converged": state.converged, "iterations_run": state.iterations_run,
            "nodes": nodes}
