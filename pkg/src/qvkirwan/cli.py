"""Command line front-end: ``qvkirwan <command> <quiver-file> [options]``."""
from __future__ import annotations

import argparse
import sys

from .linalg import Field
from .pipeline import (PIPELINES, JobSpec, PipelineError, QuiverFileError, emit_report,
                       parse_quiver_file, run_pipeline)

COMMANDS = {p: (p,) for p in PIPELINES}
COMMANDS["all"] = PIPELINES


def _field(s: str) -> Field:
    try:
        return Field.parse(s)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _seed(s: str) -> int:
    n = int(s)
    if not 0 <= n < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="quiver description file ('-' for stdin)")
    common.add_argument("--field", type=_field, default=Field(0), help="q or fp:<p> (default q)")
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--window", type=int, nargs=2, metavar=("A", "B"), default=[0, 2])
    common.add_argument("--samples", type=int, default=10)
    common.add_argument("--budget", type=int, default=10**5)
    common.add_argument("--format", choices=("text", "kv"), default="text")

    parser = argparse.ArgumentParser(prog="qvkirwan", description="Verify quiver-variety identities on samples.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.file == "-":
            text = sys.stdin.read()
        else:
            with open(args.file, encoding="utf-8") as fh:
                text = fh.read()
        job = JobSpec(parse_quiver_file(text), tuple(args.window), args.field, args.seed,
                      args.samples, args.budget, COMMANDS[args.command])
        report = run_pipeline(job)
    except (OSError, QuiverFileError, PipelineError) as exc:
        print(f"qvkirwan: error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.buffer.write(emit_report(report, args.format))
    sys.stdout.flush()
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
