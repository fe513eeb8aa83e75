"""Serve the model backend, or run a fine-tuning job from TSV data."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="concept-backend")
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the protocol server")
    p_serve.add_argument("--model", default="tiny",
                         help="'tiny' for the offline toy profile, else a pretrained identifier")
    p_serve.add_argument("--listen", default="127.0.0.1:8090")
    p_serve.add_argument("--embedding-dim", type=int, default=64)
    p_serve.add_argument("--beam-size", type=int, default=1)

    p_para = sub.add_parser("finetune-paraphrase", help="train the paraphrase head")
    p_para.add_argument("pairs", help="two-column TSV: sentence<TAB>paraphrase")
    p_para.add_argument("--model", default="tiny")
    p_para.add_argument("--epochs", type=int, default=3)
    p_para.add_argument("--lr", type=float, default=1e-3)
    p_para.add_argument("--checkpoint", default="")

    p_emb = sub.add_parser("finetune-embedding", help="train the embedding projection head")
    p_emb.add_argument("triplets", help="three-column TSV: anchor<TAB>positive<TAB>negative")
    p_emb.add_argument("--model", default="tiny")
    p_emb.add_argument("--epochs", type=int, default=10)
    p_emb.add_argument("--lr", type=float, default=5e-2)
    p_emb.add_argument("--checkpoint", default="")

    args = parser.parse_args(argv)

    from .model import ModelConfig, ModelLoadError, MultiTaskModel

    try:
        if args.command == "serve":
            import uvicorn

            from .serving import RealBackend, create_app

            config = ModelConfig(model=args.model, embedding_dim=args.embedding_dim,
                                 beam_size=args.beam_size)
            app = create_app(RealBackend(config))
            host, _, port = args.listen.rpartition(":")
            uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
            return 0

        model = MultiTaskModel(ModelConfig(model=args.model))
        checkpoint = Path(args.checkpoint) if args.checkpoint else None
        if args.command == "finetune-paraphrase":
            from .datasets import load_paraphrase_pairs
            from .finetune import finetune_paraphrase

            report = finetune_paraphrase(model, load_paraphrase_pairs(Path(args.pairs)),
                                         epochs=args.epochs, lr=args.lr,
                                         checkpoint=checkpoint)
        else:
            from .datasets import load_triplets
            from .finetune import finetune_embedding

            report = finetune_embedding(model, load_triplets(Path(args.triplets)),
                                        epochs=args.epochs, lr=args.lr,
                                        checkpoint=checkpoint)
        for epoch, loss in enumerate(report.epoch_losses, 1):
            print(f"epoch {epoch}: loss {loss:.4f}")
        if report.checkpoint_path:
            print(f"checkpoint: {report.checkpoint_path}")
        return 0
    except (ModelLoadError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
