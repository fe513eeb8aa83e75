"""Command-line entry points: serve, ingest, concepts, layout, summarize.

The ``CONCEPTEVA_BACKEND`` environment variable overrides any
``--backend`` flag, so deployments can repoint a scripted pipeline at a
real model server without editing invocations. Everything except
``serve`` is a headless batch command with deterministic output under
the mock backend.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import EngineError
from .ingest import parse_document
from .layout import LayoutConfig, layout_export
from .ontology import load_gazetteer, top_k_percent
from .pipeline import analyze_document
from .backend import make_backend
from .session import customize, generate_initial_summary


def _resolve_backend_spec(flag_value: str) -> str:
    return os.environ.get("CONCEPTEVA_BACKEND", flag_value)


def _load_doc(path: str):
    return parse_document(Path(path).read_bytes())


def _load_gaz(path: str):
    return load_gazetteer(Path(path).read_bytes())


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    host, _, port = args.listen.rpartition(":")
    config = ServiceConfig(data_dir=Path(args.data_dir),
                           gazetteer_path=Path(args.gazetteer),
                           backend=_resolve_backend_spec(args.backend),
                           listen=args.listen)
    app = create_app(config)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def cmd_ingest(args) -> int:
    doc = _load_doc(args.document)
    print(f"doc_id: {doc.doc_id}")
    print(f"title: {doc.title}")
    print(f"sections: {len(doc.sections)}")
    print(f"sentences: {doc.n_sentences}")
    print(f"tokens: {doc.token_count}")
    return 0


def cmd_concepts(args) -> int:
    doc = _load_doc(args.document)
    gaz = _load_gaz(args.gazetteer)
    from .ontology import build_cooccurrence, compute_stats, spot_concepts

    stats = compute_stats(spot_concepts(doc, gaz), doc)
    graph = build_cooccurrence(spot_concepts(doc, gaz))
    ordered = top_k_percent(stats, args.metric, args.top) if stats else []
    print(f"{'concept_id':<16}{'label':<28}{'frequency':>10}{'tfidf':>12}{'degree':>8}")
    for cid in ordered:
        stat = stats[cid]
        label = gaz.concepts[cid].label
        print(f"{cid:<16}{label:<28}{stat.frequency:>10}{stat.tfidf:>12.4f}"
              f"{len(graph.neighbors(cid)):>8}")
    return 0


def cmd_layout(args) -> int:
    doc = _load_doc(args.document)
    gaz = _load_gaz(args.gazetteer)
    backend = make_backend(_resolve_backend_spec(args.backend), gaz)
    analysis = analyze_document(doc, gaz, backend, layout_config=LayoutConfig(seed=args.seed))
    if analysis.base_layout is None:
        print("document contains no gazetteer concepts; nothing to lay out", file=sys.stderr)
        return 1
    layout = analysis.base_layout
    if args.focus:
        layout = analysis.focused_layout({c for c in args.focus.split(",") if c})
    payload = layout_export(layout, analysis.graph, analysis.sizes(args.metric))
    out = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(out, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(out)
    return 0


def cmd_summarize(args) -> int:
    doc = _load_doc(args.document)
    gaz = _load_gaz(args.gazetteer)
    backend = make_backend(_resolve_backend_spec(args.backend), gaz)
    analysis = analyze_document(doc, gaz, backend)
    session = generate_initial_summary(
        doc, backend, session_id="cli",
        max_summary_tokens=args.max_summary_tokens, chunking=args.chunking)
    if args.concepts:
        concepts = [c for c in args.concepts.split(",") if c]
        unknown = [c for c in concepts if c not in gaz.concepts]
        if unknown:
            raise ValueError(f"unknown concept ids: {unknown}")
        customize(session, concepts, doc, analysis.index, backend,
                  analysis.concept_vectors, k=args.k,
                  max_summary_tokens=args.max_summary_tokens)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary_path = out_dir / "summary.txt"
    provenance_path = out_dir / "provenance.json"
    summary_path.write_text(session.export_text(), encoding="utf-8")
    provenance_path.write_text(
        json.dumps(session.export_provenance(), sort_keys=True, indent=2) + "\n",
        encoding="utf-8")
    print(f"wrote {summary_path}")
    print(f"wrote {provenance_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="concepteva",
        description="Concept-based summary evaluation and customization engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the web service")
    p_serve.add_argument("--listen", default="127.0.0.1:8076")
    p_serve.add_argument("--data-dir", required=True)
    p_serve.add_argument("--gazetteer", required=True)
    p_serve.add_argument("--backend", default="mock", help="'mock' or a backend base URL")
    p_serve.set_defaults(func=cmd_serve)

    p_ingest = sub.add_parser("ingest", help="validate a document and report counts")
    p_ingest.add_argument("document")
    p_ingest.set_defaults(func=cmd_ingest)

    p_concepts = sub.add_parser("concepts", help="emit the concept stats table")
    p_concepts.add_argument("document")
    p_concepts.add_argument("--gazetteer", required=True)
    p_concepts.add_argument("--metric", default="frequency", choices=["frequency", "tfidf"])
    p_concepts.add_argument("--top", type=float, default=100.0)
    p_concepts.set_defaults(func=cmd_concepts)

    p_layout = sub.add_parser("layout", help="emit the layout export file")
    p_layout.add_argument("document")
    p_layout.add_argument("--gazetteer", required=True)
    p_layout.add_argument("--backend", default="mock")
    p_layout.add_argument("--metric", default="frequency", choices=["frequency", "tfidf"])
    p_layout.add_argument("--focus", default="", help="comma-separated concept ids")
    p_layout.add_argument("--seed", type=int, default=0)
    p_layout.add_argument("--out", default="")
    p_layout.set_defaults(func=cmd_layout)

    p_sum = sub.add_parser("summarize", help="run the full loop headless")
    p_sum.add_argument("document")
    p_sum.add_argument("--gazetteer", required=True)
    p_sum.add_argument("--backend", default="mock")
    p_sum.add_argument("--concepts", default="", help="comma-separated concept ids to emphasize")
    p_sum.add_argument("--k", type=int, default=5)
    p_sum.add_argument("--max-summary-tokens", type=int, default=120)
    p_sum.add_argument("--chunking", action="store_true")
    p_sum.add_argument("--out", required=True, help="output directory")
    p_sum.set_defaults(func=cmd_summarize)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (EngineError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
