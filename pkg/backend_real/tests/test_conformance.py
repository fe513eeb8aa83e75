"""Protocol conformance: the real server passes the same structural
assertions as the engine's deterministic mock (which runs here too when
the engine package is installed)."""

import pytest
from fastapi.testclient import TestClient

from backend_real.model import ModelConfig
from backend_real.serving import RealBackend, create_app

import conformance


def _real_client():
    return TestClient(create_app(RealBackend(ModelConfig(seed=1))))


def _mock_client():
    engine = pytest.importorskip(
        "concepteva.backend_app", reason="engine package not installed")
    from concepteva.backend import MockBackend

    return TestClient(engine.create_backend_app(MockBackend()))


@pytest.fixture(scope="module", params=["real", "engine-mock"])
def client(request):
    return _real_client() if request.param == "real" else _mock_client()


def test_capabilities_stable_and_consistent(client):
    conformance.check_capabilities(client)


def test_embeddings_unit_norm_correct_dim(client):
    conformance.check_embed(client, conformance.check_capabilities(client))


def test_summaries_respect_token_budget(client):
    conformance.check_summarize(client)


def test_paraphrases_never_equal_input(client):
    conformance.check_paraphrase(client)


def test_errors_are_structured(client):
    conformance.check_structured_errors(client)


def test_capacity_error_names_limit(client):
    conformance.check_capacity(client, conformance.check_capabilities(client))
