"""Gazetteer loading, concept spotting, importance metrics, and co-occurrence.

Matching is exact token-sequence matching on normalized tokens:
longest match wins at each position, scanning left to right without
overlap. There is no fuzzy matching, so extraction is reproducible and
directly checkable against a brute-force matcher.

tf-idf treats the document's sections as the pseudo-corpus:
``tfidf(c) = frequency(c) * ln(1 + S / s_c)`` where ``S`` is the number
of sections and ``s_c`` the number of sections containing ``c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import GazetteerLoadError
from .ingest import SourceDocument, tokenize


@dataclass(frozen=True)
class ConceptEntry:
    concept_id: str
    label: str
    aliases: tuple[str, ...]
    uri: str | None = None


@dataclass(frozen=True)
class ConceptOccurrence:
    concept_id: str
    sentence_global_index: int
    token_span: tuple[int, int]


@dataclass(frozen=True)
class ConceptStats:
    concept_id: str
    frequency: int
    tfidf: float
    section_counts: tuple[int, ...]


class Gazetteer:
    """Lookup table of normalized surface forms to concept ids."""

    def __init__(self, concepts: Mapping[str, ConceptEntry], entries: Mapping[str, str]):
        self.concepts = dict(concepts)
        self.entries = dict(entries)  # normalized surface form -> concept_id
        self._token_map: dict[tuple[str, ...], str] = {
            tuple(form.split(" ")): cid for form, cid in self.entries.items()
        }
        self._max_len = max((len(k) for k in self._token_map), default=0)

    def __len__(self) -> int:
        return len(self.entries)

    def match_at(self, tokens: list[str] | tuple[str, ...], start: int) -> tuple[str, int] | None:
        """Longest gazetteer match starting at ``tokens[start]``, or None."""
        limit = min(self._max_len, len(tokens) - start)
        for length in range(limit, 0, -1):
            cid = self._token_map.get(tuple(tokens[start:start + length]))
            if cid is not None:
                return cid, length
        return None


def normalize_surface_form(surface: str) -> str:
    """Lowercased, single-spaced, punctuation-free form used as the match key."""
    return " ".join(tokenize(surface))


def load_gazetteer(raw: bytes) -> Gazetteer:
    """Load a tab-separated gazetteer file.

    Line format: ``concept_id<TAB>label<TAB>uri<TAB>alias1|alias2|...``;
    lines starting with ``#`` and blank lines are ignored. Duplicate
    aliases within one concept collapse silently; the same surface form
    on two concepts is a load error naming the form.
    """
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise GazetteerLoadError(f"not valid UTF-8: {exc}") from exc

    concepts: dict[str, ConceptEntry] = {}
    entries: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise GazetteerLoadError(f"line {lineno}: expected 4 tab-separated fields, got {len(fields)}")
        concept_id, label, uri, alias_field = (f.strip() for f in fields)
        if not concept_id:
            raise GazetteerLoadError(f"line {lineno}: empty concept_id")
        if not label:
            raise GazetteerLoadError(f"line {lineno}: empty label for {concept_id}")
        if concept_id in concepts:
            raise GazetteerLoadError(f"line {lineno}: duplicate concept_id {concept_id}")

        normalized: list[str] = []
        for alias in alias_field.split("|"):
            form = normalize_surface_form(alias)
            if not form or form in normalized:
                continue
            owner = entries.get(form)
            if owner is not None and owner != concept_id:
                raise GazetteerLoadError(
                    f"line {lineno}: surface form {form!r} claimed by both {owner} and {concept_id}")
            normalized.append(form)
            entries[form] = concept_id
        concepts[concept_id] = ConceptEntry(
            concept_id=concept_id, label=label, aliases=tuple(normalized), uri=uri or None)
    return Gazetteer(concepts, entries)


def spot_tokens(tokens: list[str] | tuple[str, ...], gaz: Gazetteer) -> list[tuple[str, int, int]]:
    """Non-overlapping longest matches over one token list as (concept_id, start, end)."""
    hits: list[tuple[str, int, int]] = []
    i = 0
    n = len(tokens)
    while i < n:
        match = gaz.match_at(tokens, i)
        if match is None:
            i += 1
        else:
            cid, length = match
            hits.append((cid, i, i + length))
            i += length
    return hits


def spot_concepts(doc: SourceDocument, gaz: Gazetteer) -> list[ConceptOccurrence]:
    """All gazetteer occurrences in the document, in document order."""
    occurrences: list[ConceptOccurrence] = []
    for sentence in doc.sentences():
        for cid, start, end in spot_tokens(sentence.tokens, gaz):
            occurrences.append(ConceptOccurrence(
                concept_id=cid, sentence_global_index=sentence.global_index,
                token_span=(start, end)))
    return occurrences


def compute_stats(occurrences: Iterable[ConceptOccurrence],
                  doc: SourceDocument) -> dict[str, ConceptStats]:
    """Frequency, per-section counts, and section-idf weighted tf-idf per concept."""
    n_sections = len(doc.sections)
    section_of = {s.global_index: s.section_index for sec in doc.sections for s in sec.sentences}
    counts: dict[str, list[int]] = {}
    for occ in occurrences:
        counts.setdefault(occ.concept_id, [0] * n_sections)[section_of[occ.sentence_global_index]] += 1

    stats: dict[str, ConceptStats] = {}
    for cid, section_counts in counts.items():
        frequency = sum(section_counts)
        sections_with = sum(1 for c in section_counts if c > 0)
        tfidf = frequency * math.log(1 + n_sections / sections_with) if frequency else 0.0
        stats[cid] = ConceptStats(concept_id=cid, frequency=frequency, tfidf=tfidf,
                                  section_counts=tuple(section_counts))
    return stats


class CooccurrenceGraph:
    """Concepts as nodes; edge weight = number of sentences containing both."""

    def __init__(self, nodes: Iterable[str], edges: Mapping[tuple[str, str], int]):
        self.nodes = frozenset(nodes)
        self.edges: dict[tuple[str, str], int] = {}
        for (a, b), count in edges.items():
            if a == b:
                raise ValueError(f"self-edge on {a}")
            if count < 1:
                raise ValueError(f"edge ({a},{b}) has non-positive count {count}")
            self.edges[self._key(a, b)] = count

    @staticmethod
    def _key(a: str, b: str) -> tuple[str, str]:
        return (a, b) if a <= b else (b, a)

    def count(self, a: str, b: str) -> int:
        if a == b:
            return 0
        return self.edges.get(self._key(a, b), 0)

    def max_count(self) -> int:
        return max(self.edges.values(), default=0)

    def neighbors(self, cid: str) -> dict[str, int]:
        out: dict[str, int] = {}
        for (a, b), count in self.edges.items():
            if a == cid:
                out[b] = count
            elif b == cid:
                out[a] = count
        return out


def build_cooccurrence(occurrences: Iterable[ConceptOccurrence]) -> CooccurrenceGraph:
    """Sentence-level co-occurrence: each sentence contributes 1 to every distinct pair it contains."""
    per_sentence: dict[int, set[str]] = {}
    nodes: set[str] = set()
    for occ in occurrences:
        per_sentence.setdefault(occ.sentence_global_index, set()).add(occ.concept_id)
        nodes.add(occ.concept_id)

    edges: dict[tuple[str, str], int] = {}
    for present in per_sentence.values():
        ordered = sorted(present)
        for i, a in enumerate(ordered):
            for b in ordered[i + 1:]:
                edges[(a, b)] = edges.get((a, b), 0) + 1
    return CooccurrenceGraph(nodes, edges)


def top_k_percent(stats: Mapping[str, ConceptStats], metric: str, k_percent: float) -> list[str]:
    """The ceil(K% * N) highest concepts by ``metric`` (frequency or tfidf).

    Descending by the metric; ties broken by higher frequency, then
    lexicographic concept id.
    """
    if metric not in ("frequency", "tfidf"):
        raise ValueError(f"unknown metric {metric!r}; expected 'frequency' or 'tfidf'")
    if not 0 < k_percent <= 100:
        raise ValueError(f"K must be in (0, 100], got {k_percent}")
    if not stats:
        return []
    n_keep = math.ceil(k_percent / 100 * len(stats))
    ordered = sorted(stats.values(),
                     key=lambda s: (-getattr(s, metric), -s.frequency, s.concept_id))
    return [s.concept_id for s in ordered[:n_keep]]
