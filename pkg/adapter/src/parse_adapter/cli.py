"""Command-line entry point.

    adapt --in policy.html --html --out policy.conllu

Exit codes: 0 on success, 1 on runtime errors (unreadable input, unknown or
unavailable backend), 64 on usage errors.
"""

from __future__ import annotations

import argparse
import sys

from .config import AdapterConfig, BackendMissing, EncodingError
from .core import adapt

USAGE_EXIT = 64


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="adapt",
        description="Convert raw policy text or HTML into the annotated sentence format.",
    )
    parser.add_argument(
        "--in", dest="inputs", action="append", metavar="FILE",
        help="input file; repeat to concatenate several files into one output",
    )
    parser.add_argument("--html", action="store_true", help="strip HTML markup from the inputs")
    parser.add_argument("--out", dest="output", metavar="FILE", help="output file to write")
    parser.add_argument(
        "--backend", default="builtin", metavar="NAME",
        help="parsing backend: builtin (default) or spacy",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        missing = [flag for flag, value in (("--in", args.inputs), ("--out", args.output)) if not value]
        if missing:
            raise _UsageError(f"the following arguments are required: {', '.join(missing)}")
    except _UsageError as exc:
        print(f"adapt: error: {exc}", file=sys.stderr)
        print("run 'adapt --help' for usage", file=sys.stderr)
        return USAGE_EXIT

    try:
        config = AdapterConfig(
            inputs=tuple(args.inputs),
            output=args.output,
            html=args.html,
            backend=args.backend,
        )
        adapt(config)
    except (OSError, ValueError, BackendMissing, EncodingError) as exc:
        print(f"adapt: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
