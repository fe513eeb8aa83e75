"""Summary session lifecycle: generation, customization, editing, versions.

A session owns an ordered list of summary sentences, each tagged with
its provenance (model_generated, concept_retrieved, paraphrased,
user_edited, user_authored) and the document sentences it came from.
Every mutating operation commits exactly one full snapshot to the
version history, so undo is revert-to-version and always restores a
bitwise-equal sentence list.

Customization follows the retrieve-concatenate-summarize-append loop:
the selected concepts' embeddings query the sentence index, the
retrieved document sentences (minus any already cited in the summary)
are concatenated in document order as context, the backend summarizes
that context, and the new sentences are appended. Existing summary
sentences are never rewritten or reordered by customization.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Mapping, Sequence

import numpy as np

from .errors import CapacityError
from .embed import RetrievalConfig, SentenceIndex, knn
from .ingest import SourceDocument, tokenize
from .ontology import ConceptStats, Gazetteer, spot_tokens, top_k_percent

PROVENANCE_VALUES = ("model_generated", "concept_retrieved", "paraphrased",
                     "user_edited", "user_authored")
DEFAULT_MAX_SUMMARY_TOKENS = 120


@dataclass
class SummarySentence:
    sentence_id: str
    text: str
    provenance: str
    source_indices: list[int] = field(default_factory=list)
    concept_ids: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.text:
            raise ValueError("sentence text must be nonempty")
        if self.provenance not in PROVENANCE_VALUES:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def to_dict(self) -> dict:
        return {"sentence_id": self.sentence_id, "text": self.text,
                "provenance": self.provenance,
                "source_indices": list(self.source_indices),
                "concept_ids": list(self.concept_ids)}

    @classmethod
    def from_dict(cls, data: dict) -> "SummarySentence":
        return cls(sentence_id=data["sentence_id"], text=data["text"],
                   provenance=data["provenance"],
                   source_indices=list(data["source_indices"]),
                   concept_ids=list(data["concept_ids"]))


@dataclass
class SessionVersion:
    version: int
    timestamp: str
    sentences: list[SummarySentence]


@dataclass(frozen=True)
class Candidate:
    concept_id: str
    sentence_index: int
    text: str
    similarity: float


@dataclass(frozen=True)
class CandidateSet:
    by_concept: dict[str, list[Candidate]]


@dataclass(frozen=True)
class CustomizeResult:
    context_indices: tuple[int, ...]
    appended_ids: tuple[str, ...]
    empty_context: bool


class SummarySession:
    """Mutable summary state; one writer at a time per session."""

    def __init__(self, session_id: str, doc_id: str,
                 retrieval: RetrievalConfig | None = None):
        self.session_id = session_id
        self.doc_id = doc_id
        self.retrieval = retrieval or RetrievalConfig()
        self.sentences: list[SummarySentence] = []
        self.selected_concepts: list[str] = []
        self.versions: list[SessionVersion] = []
        self._id_counter = 0

    # -- plumbing ---------------------------------------------------------

    def next_sentence_id(self) -> str:
        self._id_counter += 1
        return f"s{self._id_counter:06d}"

    def commit(self) -> None:
        """Snapshot the current sentence list as the next version."""
        self.versions.append(SessionVersion(
            version=len(self.versions) + 1,
            timestamp=datetime.now(timezone.utc).isoformat(),
            sentences=copy.deepcopy(self.sentences)))

    def _find(self, sentence_id: str) -> int:
        for i, s in enumerate(self.sentences):
            if s.sentence_id == sentence_id:
                return i
        raise ValueError(f"unknown sentence_id {sentence_id!r}")

    def used_source_indices(self) -> set[int]:
        return {idx for s in self.sentences for idx in s.source_indices}

    def summary_texts(self) -> list[str]:
        return [s.text for s in self.sentences]

    # -- editing operations ------------------------------------------------

    def insert_sentence(self, position: int, candidate: Candidate) -> None:
        if not 0 <= position <= len(self.sentences):
            raise ValueError(f"position {position} out of range 0..{len(self.sentences)}")
        sentence = SummarySentence(
            sentence_id=self.next_sentence_id(), text=candidate.text,
            provenance="concept_retrieved",
            source_indices=[candidate.sentence_index],
            concept_ids=[candidate.concept_id])
        self.sentences.insert(position, sentence)
        self.commit()

    def accept_paraphrase(self, sentence_id: str, text: str) -> None:
        self._replace_text(sentence_id, text, "paraphrased")

    def edit_sentence(self, sentence_id: str, new_text: str) -> None:
        self._replace_text(sentence_id, new_text, "user_edited")

    def _replace_text(self, sentence_id: str, text: str, provenance: str) -> None:
        if not text:
            raise ValueError("replacement text must be nonempty")
        i = self._find(sentence_id)
        old = self.sentences[i]
        self.sentences[i] = SummarySentence(
            sentence_id=old.sentence_id, text=text, provenance=provenance,
            source_indices=list(old.source_indices), concept_ids=list(old.concept_ids))
        self.commit()

    def reorder(self, permutation: Sequence[str]) -> None:
        current = [s.sentence_id for s in self.sentences]
        if sorted(permutation) != sorted(current) or len(permutation) != len(current):
            raise ValueError("permutation must contain exactly the current sentence ids")
        by_id = {s.sentence_id: s for s in self.sentences}
        self.sentences = [by_id[sid] for sid in permutation]
        self.commit()

    def delete_sentence(self, sentence_id: str) -> None:
        del self.sentences[self._find(sentence_id)]
        self.commit()

    def revert_to_version(self, version: int) -> None:
        """Restore the sentence list of an earlier version (1-based) and commit."""
        if not 1 <= version <= len(self.versions):
            raise ValueError(f"version {version} out of range 1..{len(self.versions)}")
        self.sentences = copy.deepcopy(self.versions[version - 1].sentences)
        self.commit()

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "session_id": self.session_id,
            "doc_id": self.doc_id,
            "retrieval": {"k": self.retrieval.k},
            "selected_concepts": list(self.selected_concepts),
            "id_counter": self._id_counter,
            "sentences": [s.to_dict() for s in self.sentences],
            "versions": [{"version": v.version, "timestamp": v.timestamp,
                          "sentences": [s.to_dict() for s in v.sentences]}
                         for v in self.versions],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SummarySession":
        session = cls(session_id=data["session_id"], doc_id=data["doc_id"],
                      retrieval=RetrievalConfig(k=data["retrieval"]["k"]))
        session.selected_concepts = list(data["selected_concepts"])
        session._id_counter = data["id_counter"]
        session.sentences = [SummarySentence.from_dict(s) for s in data["sentences"]]
        session.versions = [
            SessionVersion(version=v["version"], timestamp=v["timestamp"],
                           sentences=[SummarySentence.from_dict(s) for s in v["sentences"]])
            for v in data["versions"]]
        return session

    # -- export -------------------------------------------------------------

    def export_text(self) -> str:
        return "".join(f"{s.text}\n" for s in self.sentences)

    def export_provenance(self) -> dict:
        return {
            "schema_version": 1,
            "doc_id": self.doc_id,
            "selected_concepts": list(self.selected_concepts),
            "sentences": [
                {"position": i, **s.to_dict()} for i, s in enumerate(self.sentences)
            ],
        }


def _section_groups(doc: SourceDocument, cap: int) -> list[str]:
    """Greedy whole-section grouping under the token cap; never splits a sentence."""
    groups: list[str] = []
    current: list[str] = []
    current_tokens = 0

    def flush():
        nonlocal current, current_tokens
        if current:
            groups.append("\n\n".join(current))
            current, current_tokens = [], 0

    for section in doc.sections:
        if not section.sentences:
            continue
        sec_tokens = sum(len(s.tokens) for s in section.sentences)
        if sec_tokens > cap:
            # Oversized section: fall back to greedy sentence runs.
            flush()
            run: list[str] = []
            run_tokens = 0
            for sent in section.sentences:
                if run and run_tokens + len(sent.tokens) > cap:
                    groups.append(" ".join(run))
                    run, run_tokens = [], 0
                run.append(sent.text)
                run_tokens += len(sent.tokens)
            if run:
                groups.append(" ".join(run))
            continue
        if current and current_tokens + sec_tokens > cap:
            flush()
        current.append(" ".join(s.text for s in section.sentences))
        current_tokens += sec_tokens
    flush()
    return groups


def generate_initial_summary(doc: SourceDocument, backend, *,
                             session_id: str, retrieval: RetrievalConfig | None = None,
                             max_summary_tokens: int = DEFAULT_MAX_SUMMARY_TOKENS,
                             chunking: bool = False) -> SummarySession:
    """Create a session seeded with the backend's summary of the whole document.

    Documents beyond the backend's input capacity are rejected unless
    ``chunking`` is enabled, in which case whole sections are grouped
    greedily under the cap and the per-group summaries concatenate in
    order.
    """
    if doc.n_sentences == 0:
        raise ValueError("document has no sentences to summarize")
    caps = backend.capabilities()
    over_capacity = doc.token_count > caps.max_input_tokens
    if over_capacity and not chunking:
        raise CapacityError(
            f"document has {doc.token_count} tokens, backend capacity is "
            f"{caps.max_input_tokens}; enable chunking to summarize section groups")

    if over_capacity:
        texts = _section_groups(doc, caps.max_input_tokens)
        summary: list[str] = []
        for text in texts:
            summary.extend(backend.summarize(text, max_summary_tokens, doc_context=doc))
    else:
        summary = backend.summarize(doc.full_text(), max_summary_tokens, doc_context=doc)

    session = SummarySession(session_id=session_id, doc_id=doc.doc_id, retrieval=retrieval)
    for text in summary:
        session.sentences.append(SummarySentence(
            sentence_id=session.next_sentence_id(), text=text,
            provenance="model_generated"))
    session.commit()
    return session


def _retrieve_context(session: SummarySession, concepts: Sequence[str],
                      index: SentenceIndex, concept_vectors: Mapping[str, np.ndarray],
                      k: int) -> list[int]:
    """Union of per-concept top-k hits, minus already-cited sentences, in document order."""
    missing = [c for c in concepts if c not in concept_vectors]
    if missing:
        raise ValueError(f"no embeddings for concepts {sorted(missing)}")
    used = session.used_source_indices()
    hits: set[int] = set()
    for cid in concepts:
        hits.update(idx for idx, _ in knn(index, concept_vectors[cid], k))
    return sorted(hits - used)


def customize(session: SummarySession, concepts: Sequence[str], doc: SourceDocument,
              index: SentenceIndex, backend,
              concept_vectors: Mapping[str, np.ndarray], *,
              k: int | None = None,
              max_summary_tokens: int = DEFAULT_MAX_SUMMARY_TOKENS) -> CustomizeResult:
    """Append concept-steered sentences to the summary; never touches prior ones.

    With every retrieved sentence already cited in the summary, the
    result flags ``empty_context`` and the session just commits a no-op
    version. Backend failures propagate and leave the session unchanged.
    """
    ordered = list(dict.fromkeys(concepts))
    if not ordered:
        raise ValueError("concept set must be nonempty")
    k = session.retrieval.k if k is None else k
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")

    survivors = _retrieve_context(session, ordered, index, concept_vectors, k)
    if not survivors:
        # Everything the concepts retrieve is already cited: commit a
        # no-op version and report, leaving the session otherwise as-is.
        session.commit()
        return CustomizeResult(context_indices=(), appended_ids=(), empty_context=True)

    all_sentences = doc.sentences()
    context = " ".join(all_sentences[i].text for i in survivors)
    new_texts = backend.summarize(context, max_summary_tokens, doc_context=doc)

    appended: list[str] = []
    for text in new_texts:
        sentence = SummarySentence(
            sentence_id=session.next_sentence_id(), text=text,
            provenance="concept_retrieved", source_indices=list(survivors),
            concept_ids=list(ordered))
        session.sentences.append(sentence)
        appended.append(sentence.sentence_id)
    session.selected_concepts = ordered
    session.commit()
    return CustomizeResult(context_indices=tuple(survivors),
                           appended_ids=tuple(appended), empty_context=False)


def candidate_sentences(session: SummarySession, concepts: Sequence[str],
                        index: SentenceIndex, doc: SourceDocument,
                        concept_vectors: Mapping[str, np.ndarray], *,
                        k: int | None = None) -> CandidateSet:
    """Per-concept top-k retrieval, filtered of sentences the summary already cites."""
    ordered = list(dict.fromkeys(concepts))
    if not ordered:
        raise ValueError("concept set must be nonempty")
    missing = [c for c in ordered if c not in concept_vectors]
    if missing:
        raise ValueError(f"no embeddings for concepts {sorted(missing)}")
    k = session.retrieval.k if k is None else k
    used = session.used_source_indices()
    all_sentences = doc.sentences()
    by_concept: dict[str, list[Candidate]] = {}
    for cid in ordered:
        by_concept[cid] = [
            Candidate(concept_id=cid, sentence_index=idx,
                      text=all_sentences[idx].text, similarity=sim)
            for idx, sim in knn(index, concept_vectors[cid], k)
            if idx not in used]
    return CandidateSet(by_concept=by_concept)


def paraphrase_sentence(session: SummarySession, sentence_id: str, backend,
                        n_alternatives: int | None = None) -> list[str]:
    """Alternatives for one sentence; the session is unchanged until one is accepted."""
    i = session._find(sentence_id)
    alternatives = backend.paraphrase(session.sentences[i].text, n_alternatives)
    if not alternatives:
        raise ValueError("backend returned no alternatives")
    return alternatives


def coverage_report(session: SummarySession, stats: Mapping[str, ConceptStats],
                    gaz: Gazetteer, metric: str = "frequency",
                    k_percent: float = 100.0) -> list[tuple[str, int, bool]]:
    """For each top-K% concept: (concept_id, document frequency, appears in summary)."""
    top = top_k_percent(stats, metric, k_percent)
    present: set[str] = set()
    for text in session.summary_texts():
        present.update(cid for cid, _, _ in spot_tokens(tokenize(text), gaz))
    return [(cid, stats[cid].frequency, cid in present) for cid in top]
