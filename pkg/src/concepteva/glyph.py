"""Concept glyph data: per-section document histogram and KDE-smoothed summary side.

The left half of a glyph is the concept's per-section occurrence
histogram in the document; the right half is its per-sentence counts in
the current summary, smoothed with a Gaussian kernel density estimate
so a handful of discrete positions reads as a curve. Summary-side
spotting reuses the exact matcher from the ontology module, so both
halves are computed under identical rules; a concept missing from the
summary therefore has an identically zero right half.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .ontology import ConceptStats, Gazetteer, spot_tokens
from .ingest import tokenize

CURVE_SAMPLES = 50


@dataclass(frozen=True)
class ConceptGlyph:
    concept_id: str
    left_bins: tuple[int, ...]
    right_counts: tuple[int, ...]
    right_curve: tuple[tuple[float, float], ...]


def document_histogram(concept_id: str, stats: Mapping[str, ConceptStats]) -> tuple[int, ...]:
    """Per-section occurrence counts; bins sum to the concept's document frequency."""
    if concept_id not in stats:
        raise ValueError(f"unknown concept {concept_id!r}")
    return stats[concept_id].section_counts


def kde_bandwidth(n_summary_sentences: int) -> float:
    """Wide enough to keep single occurrences visible, narrow enough not to flatten."""
    return max(0.5, n_summary_sentences / 10)


def _gaussian(x: float, mean: float, bandwidth: float) -> float:
    z = (x - mean) / bandwidth
    return math.exp(-0.5 * z * z) / (bandwidth * math.sqrt(2 * math.pi))


def summary_distribution(concept_id: str, summary_sentences: Sequence[str],
                         gaz: Gazetteer) -> tuple[tuple[int, ...], tuple[tuple[float, float], ...]]:
    """Per-sentence occurrence counts and a KDE curve over [0, n_sentences].

    Each occurrence sits at the center of its sentence's unit bin. The
    density is reflected at both domain boundaries, so with at least one
    occurrence the sampled curve integrates to ~1. No occurrences yield
    an identically zero curve; an empty summary yields empty outputs.
    """
    n = len(summary_sentences)
    if n == 0:
        return (), ()
    counts = []
    positions: list[float] = []
    for i, text in enumerate(summary_sentences):
        hits = [h for h in spot_tokens(tokenize(text), gaz) if h[0] == concept_id]
        counts.append(len(hits))
        positions.extend([i + 0.5] * len(hits))

    ts = [n * s / (CURVE_SAMPLES - 1) for s in range(CURVE_SAMPLES)]
    if not positions:
        return tuple(counts), tuple((t, 0.0) for t in ts)

    h = kde_bandwidth(n)
    curve = []
    for t in ts:
        density = sum(
            _gaussian(t, x, h) + _gaussian(t, -x, h) + _gaussian(t, 2 * n - x, h)
            for x in positions
        ) / len(positions)
        curve.append((t, density))
    return tuple(counts), tuple(curve)


def section_echo(concept_id: str, stats: Mapping[str, ConceptStats]) -> list[tuple[int, float]]:
    """Per-section weights in [0, 1], normalized by the largest section count."""
    bins = document_histogram(concept_id, stats)
    peak = max(bins, default=0)
    if peak == 0:
        return [(i, 0.0) for i in range(len(bins))]
    return [(i, count / peak) for i, count in enumerate(bins)]


def build_glyph(concept_id: str, stats: Mapping[str, ConceptStats],
                summary_sentences: Sequence[str], gaz: Gazetteer) -> ConceptGlyph:
    counts, curve = summary_distribution(concept_id, summary_sentences, gaz)
    return ConceptGlyph(concept_id=concept_id,
                        left_bins=document_histogram(concept_id, stats),
                        right_counts=counts, right_curve=curve)
