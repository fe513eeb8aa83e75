import threading

import numpy as np
import pytest
import uvicorn

from concepteva.backend import (BackendCapabilities, HttpBackend, MockBackend,
                                count_tokens, make_backend)
from concepteva.errors import BackendError, CapacityError, ProtocolError
from concepteva.ingest import parse_document
from concepteva.ontology import load_gazetteer

from conftest import doc_bytes, gazetteer_bytes


class TestCapabilities:
    def test_mock_advertises_contract(self):
        caps = MockBackend().capabilities()
        assert caps.max_input_tokens == 16384
        assert caps.embedding_dim == 64
        assert caps.supports == {"embed", "summarize", "paraphrase"}

    def test_stable_across_calls(self):
        backend = MockBackend()
        assert backend.capabilities() == backend.capabilities()

    def test_invalid_capabilities_rejected(self):
        with pytest.raises(ValueError):
            BackendCapabilities(max_input_tokens=0, embedding_dim=4, supports=frozenset())


class TestMockSummarize:
    def _gaz(self):
        return load_gazetteer(gazetteer_bytes([
            ("C1", "Alpha", "", ["alpha"]),
            ("C2", "Beta", "", ["beta"]),
        ]))

    def test_budget_covers_one_picks_higher_scoring(self):
        # Sentence 1 mentions alpha twice (higher tf-idf sum); budget fits only one.
        backend = MockBackend(self._gaz())
        text = "Plain filler sentence here. Alpha and beta appear together."
        result = backend.summarize(text, 6)
        assert result == ["Alpha and beta appear together."]

    def test_budget_covers_all_keeps_order(self):
        backend = MockBackend(self._gaz())
        text = "Alpha starts. Beta follows."
        assert backend.summarize(text, 100) == ["Alpha starts.", "Beta follows."]

    def test_equal_scores_earlier_wins(self):
        backend = MockBackend()  # no gazetteer -> score by token count
        text = "One two three. Four five six."
        assert backend.summarize(text, 3) == ["One two three."]

    def test_no_gazetteer_scores_by_length(self):
        backend = MockBackend()
        text = "Short one. A much longer sentence with many more words inside."
        result = backend.summarize(text, 10)
        assert result == ["A much longer sentence with many more words inside."]

    def test_doc_context_tfidf_flips_selection(self):
        gaz = self._gaz()
        backend = MockBackend(gaz)
        text = "Alpha appears anew. Beta beta appears anew."
        # Inline scoring (input text as its own corpus): beta occurs twice,
        # 2*ln(2) beats alpha's ln(2), so the beta sentence wins.
        assert backend.summarize(text, 4) == ["Beta beta appears anew."]
        # Against the context document alpha is concentrated in one of two
        # sections (2*ln(3)) while beta spreads across both (2*ln(2)), so
        # the same request now prefers the alpha sentence.
        context_doc = parse_document(doc_bytes([
            ("S0", ["Alpha and alpha with beta."]), ("S1", ["Beta returns."]),
        ]))
        assert backend.summarize(text, 4, doc_context=context_doc) == \
            ["Alpha appears anew."]

    def test_empty_text_rejected(self):
        with pytest.raises(ValueError):
            MockBackend().summarize("   ", 10)

    def test_capacity_enforced(self):
        backend = MockBackend(max_input_tokens=5)
        with pytest.raises(CapacityError):
            backend.summarize("one two three four five six seven.", 10)

    def test_deterministic(self):
        backend = MockBackend(self._gaz())
        text = "Alpha one. Beta two. Alpha beta three."
        assert backend.summarize(text, 8) == backend.summarize(text, 8)

    def test_budget_respected(self):
        backend = MockBackend(self._gaz())
        text = "Alpha one two three. Beta four five. Plain six seven eight nine."
        for budget in (3, 5, 8, 12):
            result = backend.summarize(text, budget)
            assert sum(count_tokens(s) for s in result) <= budget


class TestMockParaphrase:
    def test_comma_swap(self):
        assert MockBackend().paraphrase("alpha, beta")[0] == "beta, alpha"

    def test_comma_swap_preserves_terminator(self):
        assert MockBackend().paraphrase("alpha, beta.")[0] == "beta, alpha."

    def test_no_comma_fallback(self):
        assert MockBackend().paraphrase("alpha beta")[0] == "Rephrased: alpha beta"

    def test_n_distinct_alternatives(self):
        alts = MockBackend().paraphrase("alpha beta", 3)
        assert len(alts) == 3
        assert len(set(alts)) == 3
        assert all(a != "alpha beta" for a in alts)

    def test_never_equals_input(self):
        for sentence in ("alpha, beta", "plain words", "a, a", "Rephrased: x"):
            for alt in MockBackend().paraphrase(sentence, 4):
                assert alt != sentence

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            MockBackend().paraphrase("  ")


class TestMockEmbedContract:
    def test_unit_norm_and_dim(self):
        backend = MockBackend(dim=32)
        vectors = backend.embed(["one", "two words", ""])
        assert len(vectors) == 3
        for v in vectors:
            assert v.shape == (32,)
            assert abs(np.linalg.norm(v) - 1.0) < 1e-9


class TestMakeBackend:
    def test_mock(self):
        assert isinstance(make_backend("mock"), MockBackend)

    def test_url(self):
        backend = make_backend("http://127.0.0.1:9")
        assert isinstance(backend, HttpBackend)
        backend.close()

    def test_rejects_garbage(self):
        with pytest.raises(ValueError):
            make_backend("carrier-pigeon")


class _FlakyTransport:
    """Fails with a connect error n times, then delegates to a mock backend."""

    def __init__(self, failures):
        self.failures = failures
        self.calls = 0

    def handle(self, request):
        import httpx

        self.calls += 1
        if self.calls <= self.failures:
            raise httpx.ConnectError("synthetic outage", request=request)
        backend = MockBackend()
        if request.url.path == "/capabilities":
            caps = backend.capabilities()
            return httpx.Response(200, json={
                "max_input_tokens": caps.max_input_tokens,
                "embedding_dim": caps.embedding_dim,
                "supports": sorted(caps.supports)})
        if request.url.path == "/embed":
            import json

            texts = json.loads(request.content)["texts"]
            return httpx.Response(200, json={
                "vectors": [v.tolist() for v in backend.embed(texts)]})
        raise AssertionError(f"unexpected path {request.url.path}")


class TestHttpBackendRetry:
    def _backend(self, failures):
        import httpx

        transport = _FlakyTransport(failures)
        return HttpBackend("http://backend.test", retry_backoff=0.0,
                           transport=httpx.MockTransport(transport.handle)), transport

    def test_idempotent_calls_retried(self):
        backend, transport = self._backend(failures=2)
        caps = backend.capabilities()
        assert caps.embedding_dim == 64
        assert transport.calls == 3  # two failures + success

    def test_gives_up_after_retries(self):
        backend, _ = self._backend(failures=10)
        with pytest.raises(BackendError) as info:
            backend.capabilities()
        assert info.value.code == "unreachable"

    def test_embed_roundtrip_and_validation(self):
        backend, _ = self._backend(failures=0)
        vectors = backend.embed(["alpha", "beta"])
        expected = MockBackend().embed(["alpha", "beta"])
        for got, want in zip(vectors, expected):
            np.testing.assert_allclose(got, want, atol=1e-12)


@pytest.fixture(scope="module")
def server_url():
    from concepteva.backend_app import create_backend_app

    app = create_backend_app(MockBackend())
    config = uvicorn.Config(app, host="127.0.0.1", port=8199, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    import time

    for _ in range(100):
        if server.started:
            break
        time.sleep(0.05)
    yield "http://127.0.0.1:8199"
    server.should_exit = True
    thread.join(timeout=5)


class TestHttpBackendAgainstLiveServer:
    """Full wire round-trip through a real socket with the mock behind it."""

    def test_summarize_paraphrase_embed_over_the_wire(self, server_url):
        backend = HttpBackend(server_url)
        caps = backend.capabilities()
        assert caps.max_input_tokens == 16384

        sentences = backend.summarize("Alpha one. Beta two three four.", 4)
        assert sentences == ["Beta two three four."]

        alts = backend.paraphrase("alpha, beta", 2)
        assert alts[0] == "beta, alpha"
        assert len(alts) == 2

        vectors = backend.embed(["alpha"])
        np.testing.assert_allclose(vectors[0], MockBackend().embed(["alpha"])[0], atol=1e-12)
        backend.close()

    def test_backend_error_is_structured(self, server_url):
        backend = HttpBackend(server_url)
        with pytest.raises(BackendError) as info:
            backend.summarize("", 10)
        assert info.value.code == "malformed"
        backend.close()
