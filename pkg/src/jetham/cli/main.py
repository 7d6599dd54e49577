"""``jetham`` command line.

Exit codes: 0 success, 1 usage or parse error, 2 derivation error,
3 a property check failed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from jetham import __version__
from jetham.cli.dsl import parse_model
from jetham.cli.emit import FORMATS, emit
from jetham.cli.runner import check_model, run_tasks
from jetham.errors import DerivationError, ParseError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DERIVATION = 2
EXIT_CHECK = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jetham", description="Derive covariant Hamilton equations from model files.")
    parser.add_argument("--version", action="version", version=f"jetham {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    derive = sub.add_parser("derive", help="run the tasks of a model file and print the results")
    derive.add_argument("model", type=Path)
    derive.add_argument("--format", choices=FORMATS, default="text")
    derive.add_argument("--out", type=Path, default=None, help="write output here instead of stdout")

    check = sub.add_parser("check", help="run every property check that applies to a model file")
    check.add_argument("model", type=Path)
    check.add_argument("--format", choices=FORMATS, default="text")
    return parser


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        model = parse_model(_read(args.model))
    except ParseError as exc:
        print(f"{args.model}:{exc}", file=sys.stderr)
        return EXIT_USAGE
    except DerivationError as exc:
        # e.g. an expression blowing past JETHAM_MAX_TERMS while it is expanded
        print(f"{args.model}: error: {exc}", file=sys.stderr)
        return EXIT_DERIVATION
    try:
        doc = run_tasks(model) if args.command == "derive" else check_model(model)
    except DerivationError as exc:
        print(f"{args.model}: error: {exc}", file=sys.stderr)
        return EXIT_DERIVATION
    text = emit(doc, args.format)
    out = getattr(args, "out", None)
    if out is not None:
        out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK if doc.ok else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
