"""Document parsing, sentence segmentation, and tokenization.

The interchange format is a UTF-8 JSON object with top-level fields
``doc_id``, ``title``, and ``sections[]``; each section carries a
``heading`` and ``paragraphs[]`` (plain strings). Any extra per-section
fields (figures, tables, reference lists) are kept as opaque metadata
and never enter sentence indexing.

Segmentation and tokenization are deliberately rule-based so that the
whole pipeline is deterministic: the same bytes always produce the same
sentence indices.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import DocumentParseError

# Terminators that end an abbreviation never split a sentence.
ABBREVIATIONS = ("e.g.", "i.e.", "et al.", "Fig.", "Eq.", "vs.", "cf.")

_TERMINATOR_RE = re.compile(r"[.?!]")
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class Sentence:
    """One sentence with a stable position in the whole document.

    ``char_span`` is (start, end) into the owning section's text;
    ``tokens`` are the lowercased word tokens used for concept matching.
    """

    global_index: int
    section_index: int
    char_span: tuple[int, int]
    text: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class Section:
    index: int
    heading: str
    text: str
    sentences: tuple[Sentence, ...]
    metadata: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class SourceDocument:
    doc_id: str
    title: str
    sections: tuple[Section, ...]
    token_count: int

    def sentences(self) -> list[Sentence]:
        return [s for sec in self.sections for s in sec.sentences]

    def sentence(self, global_index: int) -> Sentence:
        sents = self.sentences()
        if not 0 <= global_index < len(sents):
            raise ValueError(f"sentence index {global_index} out of range")
        return sents[global_index]

    @property
    def n_sentences(self) -> int:
        return sum(len(sec.sentences) for sec in self.sections)

    def full_text(self) -> str:
        """Body text for summarization: sentences joined per section, sections separated by blank lines."""
        parts = []
        for sec in self.sections:
            if sec.sentences:
                parts.append(" ".join(s.text for s in sec.sentences))
        return "\n\n".join(parts)


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric word tokens; punctuation is dropped, intra-word digits kept."""
    return [t.lower() for t in _TOKEN_RE.findall(text)]


def segment_sentences(text: str) -> list[tuple[int, int]]:
    """Split ``text`` into sentence char spans.

    A boundary is a terminator in ``[.?!]`` followed by whitespace and
    then an uppercase letter or digit, unless the terminator closes one
    of the fixed abbreviations. Spans are trimmed of surrounding
    whitespace; text without a terminator yields a single span.
    """
    n = len(text)
    boundaries: list[int] = []
    for m in _TERMINATOR_RE.finditer(text):
        j = m.end()
        k = j
        while k < n and text[k].isspace():
            k += 1
        if k == j or k >= n:
            continue
        if not (text[k].isupper() or text[k].isdigit()):
            continue
        head = text[:j].lower()
        if any(head.endswith(abbr.lower()) for abbr in ABBREVIATIONS):
            continue
        boundaries.append(j)

    spans: list[tuple[int, int]] = []
    prev = 0
    for bound in [*boundaries, n]:
        start, end = prev, bound
        while start < end and text[start].isspace():
            start += 1
        while end > start and text[end - 1].isspace():
            end -= 1
        if start < end:
            spans.append((start, end))
        prev = bound
    return spans


def _parse_section(raw_section: object, index: int) -> Section:
    if not isinstance(raw_section, dict):
        raise DocumentParseError(f"sections[{index}] is not an object")
    heading = raw_section.get("heading")
    if not isinstance(heading, str):
        raise DocumentParseError(f"sections[{index}].heading missing or not a string")
    paragraphs = raw_section.get("paragraphs")
    if not isinstance(paragraphs, list) or any(not isinstance(p, str) for p in paragraphs):
        raise DocumentParseError(f"sections[{index}].paragraphs missing or not a list of strings")
    metadata = {k: v for k, v in raw_section.items() if k not in ("heading", "paragraphs")}

    # Paragraph breaks are hard sentence boundaries: segment each
    # paragraph, then shift spans into the joined section text.
    text = "\n".join(paragraphs)
    spans: list[tuple[int, int]] = []
    offset = 0
    for para in paragraphs:
        spans.extend((start + offset, end + offset) for start, end in segment_sentences(para))
        offset += len(para) + 1
    return Section(index=index, heading=heading, text=text, sentences=tuple(
        Sentence(global_index=-1, section_index=index, char_span=span,
                 text=text[span[0]:span[1]], tokens=tuple(tokenize(text[span[0]:span[1]])))
        for span in spans
    ), metadata=metadata)


def parse_document(raw: bytes) -> SourceDocument:
    """Parse interchange-format bytes into a :class:`SourceDocument`.

    Deterministic for identical input. Raises
    :class:`~concepteva.errors.DocumentParseError` naming the offending
    field on malformed input; a document with zero sections is valid.
    """
    try:
        payload = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DocumentParseError(f"not valid UTF-8 JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise DocumentParseError("top-level value is not an object")
    doc_id = payload.get("doc_id")
    if not isinstance(doc_id, str) or not doc_id:
        raise DocumentParseError("doc_id missing or not a nonempty string")
    title = payload.get("title")
    if not isinstance(title, str):
        raise DocumentParseError("title missing or not a string")
    raw_sections = payload.get("sections")
    if not isinstance(raw_sections, list):
        raise DocumentParseError("sections missing or not a list")

    sections: list[Section] = []
    counter = 0
    for i, raw_section in enumerate(raw_sections):
        section = _parse_section(raw_section, i)
        renumbered = tuple(
            Sentence(global_index=counter + j, section_index=i,
                     char_span=s.char_span, text=s.text, tokens=s.tokens)
            for j, s in enumerate(section.sentences)
        )
        counter += len(renumbered)
        sections.append(Section(index=i, heading=section.heading, text=section.text,
                                sentences=renumbered, metadata=section.metadata))
    token_count = sum(len(s.tokens) for sec in sections for s in sec.sentences)
    return SourceDocument(doc_id=doc_id, title=title, sections=tuple(sections),
                          token_count=token_count)
