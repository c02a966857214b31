"""Operator entry point: serve a model, or materialize the offline demo model."""

from __future__ import annotations

import argparse
import sys

from .model import ModelLoadError, ServerConfig, materialize_demo_model
from .server import DistributionServer


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covertext-lm-server",
        description="serve transformer next-token distributions over the wire protocol",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="serve a local model")
    serve.add_argument("--model", required=True, help="local model directory or hub id")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=7637)
    serve.add_argument("--top-n", type=int, default=512, help="cap on entries per response")
    serve.add_argument("--device", default="cpu")
    serve.add_argument("--no-deterministic", action="store_true",
                       help="allow nondeterministic kernels (breaks decoding guarantees)")

    demo = sub.add_parser("init-demo-model",
                          help="write a tiny seeded model for offline integration runs")
    demo.add_argument("--out", required=True)
    demo.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "init-demo-model":
        path = materialize_demo_model(args.out, seed=args.seed)
        print(path)
        return 0

    config = ServerConfig(
        model_path=args.model,
        top_n_cap=args.top_n,
        device=args.device,
        deterministic=not args.no_deterministic,
        host=args.host,
        port=args.port,
    )
    try:
        server = DistributionServer(config)
    except ModelLoadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"serving {args.model} on {server.address}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
