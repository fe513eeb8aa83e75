"""End-to-end document analysis: parse -> spot -> stats -> embed -> project -> layout.

This facade bundles everything the service and the CLI need per
document, computed once and deterministically. Concept embeddings come
from the backend's embedding of each concept's display label, and the
same vectors feed the projection, the focus-on relevance ranking, and
retrieval queries during customization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .embed import SentenceIndex, build_sentence_index, embed_texts
from .ingest import SourceDocument
from .layout import LayoutConfig, LayoutState, focus_on, init_layout, run_layout
from .ontology import (ConceptOccurrence, ConceptStats, CooccurrenceGraph,
                       Gazetteer, build_cooccurrence, compute_stats, spot_concepts)
from .project import Projection2D, ProjectionProvider, project


@dataclass
class DocumentAnalysis:
    doc: SourceDocument
    gazetteer: Gazetteer
    occurrences: list[ConceptOccurrence]
    stats: dict[str, ConceptStats]
    graph: CooccurrenceGraph
    concept_vectors: dict[str, np.ndarray]
    projection: Projection2D | None
    base_layout: LayoutState | None
    index: SentenceIndex
    layout_config: LayoutConfig = field(default_factory=LayoutConfig)

    def sizes(self, metric: str = "frequency") -> dict[str, float]:
        if metric not in ("frequency", "tfidf"):
            raise ValueError(f"unknown metric {metric!r}")
        return {cid: float(getattr(s, metric)) for cid, s in self.stats.items()}

    def focused_layout(self, focus: set[str]) -> LayoutState:
        if self.base_layout is None:
            raise ValueError("document has no concepts to lay out")
        return focus_on(self.base_layout, focus, self.concept_vectors,
                        self.graph, self.layout_config)


def analyze_document(doc: SourceDocument, gaz: Gazetteer, backend, *,
                     layout_config: LayoutConfig | None = None,
                     projection_method: str = "pca",
                     projection_provider: ProjectionProvider | None = None) -> DocumentAnalysis:
    layout_config = layout_config or LayoutConfig()
    occurrences = spot_concepts(doc, gaz)
    stats = compute_stats(occurrences, doc)
    graph = build_cooccurrence(occurrences)

    concept_ids = sorted(stats)
    concept_vectors: dict[str, np.ndarray] = {}
    projection = None
    base_layout = None
    if concept_ids:
        labels = [gaz.concepts[cid].label for cid in concept_ids]
        vectors = embed_texts(backend, labels)
        concept_vectors = dict(zip(concept_ids, vectors))
        projection = project(concept_vectors, projection_method, projection_provider)
        base_layout = run_layout(init_layout(projection.coords), graph, layout_config)

    index = build_sentence_index(doc, backend)
    return DocumentAnalysis(doc=doc, gazetteer=gaz, occurrences=occurrences,
                            stats=stats, graph=graph, concept_vectors=concept_vectors,
                            projection=projection, base_layout=base_layout,
                            index=index, layout_config=layout_config)
