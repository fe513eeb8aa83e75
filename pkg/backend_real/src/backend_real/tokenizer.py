"""Deterministic word-level tokenizer for the self-contained toy model.

Real deployments load a pretrained checkpoint with its own tokenizer;
the toy profile needs one that works offline. Words hash into a fixed
vocabulary, and decoding maps ids back to a stable word list, so encode
and decode are pure functions and generated text is always plain
space-separated words.
"""

from __future__ import annotations

import hashlib

PAD_ID = 0
BOS_ID = 1
EOS_ID = 2
_SPECIALS = 3


class HashWordTokenizer:
    def __init__(self, vocab_size: int = 512):
        if vocab_size <= _SPECIALS + 1:
            raise ValueError("vocab_size too small")
        self.vocab_size = vocab_size
        self._words = [f"w{i}" for i in range(vocab_size - _SPECIALS)]

    def _word_id(self, word: str) -> int:
        digest = hashlib.blake2b(word.lower().encode("utf-8"), digest_size=4).digest()
        return _SPECIALS + int.from_bytes(digest, "little") % (self.vocab_size - _SPECIALS)

    def encode(self, text: str, max_length: int | None = None) -> list[int]:
        ids = [self._word_id(w) for w in text.split()]
        if max_length is not None:
            ids = ids[:max_length]
        return ids or [BOS_ID]

    def decode(self, ids) -> str:
        words = []
        for i in ids:
            i = int(i)
            if i < _SPECIALS:
                continue
            words.append(self._words[i - _SPECIALS])
        return " ".join(words)

    def count_tokens(self, text: str) -> int:
        return len(text.split())
