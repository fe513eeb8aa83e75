#!/usr/bin/env python3
"""Offline renderer for layout export files.

Consumes the JSON emitted by ``concepteva layout ... --out`` and draws
the concept graph: circles sized by the export's size field, edges with
width scaled by co-occurrence count.

Usage:
  concepteva layout data/sample_doc.json --gazetteer data/sample_gazetteer.tsv --out /tmp/layout.json
  python3 scripts/render_layout.py /tmp/layout.json --out /tmp/layout.png
"""

import argparse
import json
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def render(payload: dict, out_path: str):
    nodes = {n["concept_id"]: n for n in payload["nodes"]}
    fig, ax = plt.subplots(figsize=(7, 7))

    drawn = set()
    for node in payload["nodes"]:
        for edge in node["edges"]:
            key = tuple(sorted((node["concept_id"], edge["other"])))
            if key in drawn or edge["other"] not in nodes:
                continue
            drawn.add(key)
            other = nodes[edge["other"]]
            ax.plot([node["x"], other["x"]], [node["y"], other["y"]],
                    color="#8888aa", linewidth=0.5 + 0.6 * math.log1p(edge["count"]),
                    alpha=0.6, zorder=1)

    max_size = max((n["size"] for n in payload["nodes"]), default=1.0) or 1.0
    for node in payload["nodes"]:
        radius = 120 + 900 * node["size"] / max_size
        ax.scatter(node["x"], node["y"], s=radius, color="#e8a33d",
                   edgecolors="#7a521a", zorder=2)
        ax.annotate(node["concept_id"], (node["x"], node["y"]),
                    ha="center", va="center", fontsize=7, zorder=3)

    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_title(f"mode={payload['mode']}"
                 + (f" focus={','.join(payload['focus_set'])}" if payload["focus_set"] else ""))
    ax.set_aspect("equal")
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    print(f"wrote {out_path}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("export", help="layout export JSON file")
    parser.add_argument("--out", default="layout.png")
    args = parser.parse_args()
    with open(args.export, encoding="utf-8") as handle:
        payload = json.load(handle)
    render(payload, args.out)


if __name__ == "__main__":
    main()
