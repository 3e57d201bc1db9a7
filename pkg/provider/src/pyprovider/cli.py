"""Command line entry point: ``pyprovider serve``."""

from __future__ import annotations

import argparse
import sys

from emoship.errors import InputError

from .backend import load_backend
from .server import serve_http, serve_stdio


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pyprovider",
        description="Reference vision-language provider service")
    sub = parser.add_subparsers(dest="command", required=True)
    serve = sub.add_parser("serve", help="run the provider service")
    serve.add_argument("--mode", choices=("stdio", "http"), default="stdio")
    serve.add_argument("--model-dir", required=True,
                       help="directory holding model.txt and frames/")
    serve.add_argument("--image-root", default=None,
                       help="directory holding scene images (fallback source)")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=0,
                       help="http port; 0 picks a free one")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        backend = load_backend(args.model_dir, args.image_root)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.mode == "stdio":
        serve_stdio(backend)
    else:
        serve_http(backend, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
