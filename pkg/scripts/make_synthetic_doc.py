#!/usr/bin/env python3
"""Generate a synthetic interchange document of a target token size.

Handy for throughput experiments: the emitted document reuses the
sample gazetteer's vocabulary so concept extraction finds plenty of
matches.

Usage:
  python3 scripts/make_synthetic_doc.py --tokens 16000 --out /tmp/big_doc.json
"""

import argparse
import json
import random

VOCABULARY = [
    "pollination", "garden", "soil", "climate", "bee", "yield", "native",
    "plants", "irrigation", "community", "habitat", "study", "plots",
    "district", "season", "observer", "biodiversity", "pesticide",
]


def build(target_tokens: int, seed: int, sentences_per_section: int = 40):
    rng = random.Random(seed)
    sections = []
    tokens = 0
    while tokens < target_tokens:
        sentences = []
        for _ in range(sentences_per_section):
            words = [rng.choice(VOCABULARY) for _ in range(10)]
            sentences.append(" ".join(words).capitalize() + ".")
            tokens += 10
        sections.append({
            "heading": f"Section {len(sections)}",
            "paragraphs": [" ".join(sentences)],
        })
    return {"doc_id": f"synthetic-{target_tokens}-{seed}",
            "title": f"Synthetic document ({target_tokens} tokens)",
            "sections": sections}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--tokens", type=int, default=16000)
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--out", required=True)
    args = parser.parse_args()
    payload = build(args.tokens, args.seed)
    with open(args.out, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
    print(f"wrote {args.out} ({sum(len(s['paragraphs'][0].split()) for s in payload['sections'])} words)")


if __name__ == "__main__":
    main()
