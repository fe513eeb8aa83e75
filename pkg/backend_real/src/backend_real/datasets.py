"""Fine-tuning dataset loaders.

Paraphrase pairs: two-column UTF-8 TSV (sentence, paraphrase).
Embedding triplets: three-column UTF-8 TSV (anchor, positive, negative).
Schema violations raise ``DataError`` naming the line.
"""

from __future__ import annotations

from pathlib import Path


class DataError(ValueError):
    pass


def _rows(path: Path, n_columns: int, kind: str) -> list[tuple[str, ...]]:
    rows: list[tuple[str, ...]] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != n_columns:
            raise DataError(f"{kind} line {lineno}: expected {n_columns} columns, got {len(fields)}")
        if any(not f.strip() for f in fields):
            raise DataError(f"{kind} line {lineno}: empty field")
        rows.append(tuple(f.strip() for f in fields))
    if not rows:
        raise DataError(f"{kind} file {path} has no data rows")
    return rows


def load_paraphrase_pairs(path: Path) -> list[tuple[str, str]]:
    return [(a, b) for a, b in _rows(path, 2, "paraphrase pairs")]


def load_triplets(path: Path) -> list[tuple[str, str, str]]:
    return [(a, p, n) for a, p, n in _rows(path, 3, "triplets")]
