import json
from pathlib import Path

import pytest

from concepteva.ingest import parse_document
from concepteva.ontology import load_gazetteer

REPO_ROOT = Path(__file__).resolve().parents[1]
SAMPLE_DOC_PATH = REPO_ROOT / "data" / "sample_doc.json"
SAMPLE_GAZETTEER_PATH = REPO_ROOT / "data" / "sample_gazetteer.tsv"


def doc_bytes(sections, doc_id="doc-1", title="Test Document") -> bytes:
    """Interchange payload from [(heading, [paragraph, ...]), ...]."""
    return json.dumps({
        "doc_id": doc_id,
        "title": title,
        "sections": [{"heading": h, "paragraphs": list(ps)} for h, ps in sections],
    }).encode("utf-8")


def gazetteer_bytes(rows) -> bytes:
    """Gazetteer file from [(concept_id, label, uri, [alias, ...]), ...]."""
    lines = ["\t".join([cid, label, uri, "|".join(aliases)])
             for cid, label, uri, aliases in rows]
    return "\n".join(lines).encode("utf-8")


@pytest.fixture(scope="session")
def sample_doc():
    return parse_document(SAMPLE_DOC_PATH.read_bytes())


@pytest.fixture(scope="session")
def sample_gazetteer():
    return load_gazetteer(SAMPLE_GAZETTEER_PATH.read_bytes())
