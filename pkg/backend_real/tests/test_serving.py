import numpy as np
import pytest

from backend_real.model import ModelConfig, ModelLoadError, MultiTaskModel
from backend_real.serving import RealBackend, clip_to_budget, count_tokens
from backend_real.tokenizer import HashWordTokenizer


@pytest.fixture(scope="module")
def backend():
    return RealBackend(ModelConfig(seed=0))


class TestTokenizer:
    def test_encode_decode_round_trip_is_stable(self):
        tok = HashWordTokenizer(512)
        ids = tok.encode("alpha beta gamma")
        assert ids == tok.encode("alpha beta gamma")
        assert len(ids) == 3
        assert tok.decode(ids).count(" ") == 2

    def test_empty_text_still_encodes(self):
        tok = HashWordTokenizer(512)
        assert tok.encode("") == [1]  # BOS placeholder

    def test_max_length_truncates(self):
        tok = HashWordTokenizer(512)
        assert len(tok.encode("a b c d e f", max_length=4)) == 4


class TestClipToBudget:
    def test_keeps_whole_sentences_under_budget(self):
        sentences = ["one two three.", "four five.", "six seven eight nine."]
        kept = clip_to_budget(sentences, 5)
        assert kept == ["one two three.", "four five."]

    def test_oversized_first_sentence_truncated(self):
        kept = clip_to_budget(["one two three four five six."], 3)
        assert kept == ["one two three"]
        assert count_tokens(kept[0]) == 3

    def test_empty_input(self):
        assert clip_to_budget([], 10) == []


class TestRealBackendBehavior:
    def test_embeddings_are_unit_norm_float64(self, backend):
        vectors = backend.embed(["alpha beta gamma", ""])
        for v in vectors:
            assert abs(np.linalg.norm(np.asarray(v)) - 1.0) <= 1e-12

    def test_identical_texts_in_one_batch_identical(self, backend):
        a, b = backend.embed(["same text", "same text"])
        assert a == b

    def test_summary_never_exceeds_budget(self, backend):
        text = "Alpha beta gamma delta. Epsilon zeta eta theta. Iota kappa lambda mu."
        for budget in (1, 4, 9, 30):
            out = backend.summarize(text, budget)
            assert sum(count_tokens(s) for s in out) <= budget

    def test_paraphrase_count_and_distinctness(self, backend):
        alts = backend.paraphrase("a plain sentence with no punctuation", 4)
        assert len(alts) == 4
        assert len(set(alts)) == 4

    def test_capacity_and_validation_errors(self, backend):
        caps = backend.capabilities()
        with pytest.raises(Exception, match="capacity|tokens"):
            backend.summarize("word " * (caps["max_input_tokens"] + 5), 10)
        with pytest.raises(ValueError):
            backend.summarize("", 10)
        with pytest.raises(ValueError):
            backend.paraphrase("x", 0)

    def test_unknown_pretrained_identifier_is_startup_error(self):
        with pytest.raises(ModelLoadError):
            MultiTaskModel(ModelConfig(model="no/such-model-anywhere"))

    def test_tiny_capacity_clamped_to_positions(self):
        config = ModelConfig()
        assert config.max_input_tokens <= config.tiny_max_positions
