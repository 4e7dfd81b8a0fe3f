"""Command line: `serve` a model over stdio/TCP, or `dump` fixture files."""
from __future__ import annotations

import argparse
import logging
import sys

from .fixtures import dump_fixtures
from .model import HiddenStateEncoder
from .server import serve_stdio, serve_tcp


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="encoder-sidecar", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="answer hello/encode requests")
    p.add_argument("--model", required=True, help="model id or local directory")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--stdio", action="store_true")
    group.add_argument("--port", type=int, help="TCP port (0 picks a free one)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--device", default="cpu")

    p = sub.add_parser("dump", help="freeze encode responses into a fixture file")
    p.add_argument("--model", required=True)
    p.add_argument("--lang", required=True)
    p.add_argument("--sentences", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--device", default="cpu")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING)
    args = build_parser().parse_args(argv)
    try:
        encoder = HiddenStateEncoder(args.model, device=args.device)
    except Exception as exc:
        # model load failure: exit nonzero before accepting any request
        print(f"model load failed: {exc}", file=sys.stderr)
        return 1
    if args.command == "serve":
        if args.stdio:
            serve_stdio(encoder)
        else:
            serve_tcp(encoder, args.host, args.port)
        return 0
    written = dump_fixtures(args.sentences, args.lang, args.out, encoder)
    print(f"wrote {written} fixture records to {args.out}")
    return 0


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
