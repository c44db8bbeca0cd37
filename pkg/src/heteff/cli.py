"""Command-line front end.

Subcommands: analyze (trace -> report), generate (scenario -> trace),
validate (trace -> findings), import (external events -> trace).

Exit codes: 0 success, 1 validation or scenario errors, 2 I/O or parse
errors, 3 usage errors. Diagnostics go to stderr, payload to stdout or the
--out path.
"""

from __future__ import annotations

import argparse
import sys

from .metrics import AnalysisError, compute_report
from .model import InvalidTraceError, validate
from .report import RenderOptions, render_json, render_text
from .scenario import PRESET_NAMES, ScenarioError, build, preset, read_scenario, scale_spec
from .trace_io import MappingError, TraceFormatError, import_mapped, read_mapping, read_trace, write_trace

EXIT_OK = 0
EXIT_DATA = 1
EXIT_IO = 2
EXIT_USAGE = 3


class _Failure(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; we reserve 2 for I/O."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text}")
    return value


def _read_file(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as e:
        raise _Failure(EXIT_IO, f"cannot read {path}: {e}")


def _write_payload(path: str, payload: bytes) -> None:
    if path == "-":
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
        return
    try:
        with open(path, "wb") as fh:
            fh.write(payload)
    except OSError as e:
        raise _Failure(EXIT_IO, f"cannot write {path}: {e}")


def _load_trace(path: str):
    data = _read_file(path)
    try:
        return read_trace(data)
    except TraceFormatError as e:
        raise _Failure(EXIT_IO, f"{path}: {e}")


def _cmd_analyze(args) -> int:
    trace = _load_trace(args.trace)
    try:
        report = compute_report(trace)
    except InvalidTraceError as e:
        lines = "\n".join(f"  error: {msg}" for msg in e.report.errors)
        raise _Failure(EXIT_DATA, f"{args.trace} failed validation:\n{lines}")
    except AnalysisError as e:
        raise _Failure(EXIT_DATA, f"{args.trace}: {e}")
    opts = RenderOptions(
        format=args.format,
        precision=args.precision,
        show_raw=args.show_raw,
        ascii_tree=args.ascii,
    )
    if opts.format == "json":
        payload = render_json(report, opts)
    else:
        payload = render_text(report, opts).encode("utf-8")
    _write_payload(args.out, payload)
    return EXIT_OK


def _cmd_generate(args) -> int:
    try:
        if args.preset:
            spec = preset(args.preset, args.scale)
        else:
            data = _read_file(args.spec)
            try:
                spec = read_scenario(data)
            except TraceFormatError as e:
                raise _Failure(EXIT_IO, f"{args.spec}: {e}")
            if args.scale != 1:
                spec = scale_spec(spec, args.scale)
        trace = build(spec)
    except ScenarioError as e:
        raise _Failure(EXIT_DATA, f"scenario error: {e}")
    _write_payload(args.out, write_trace(trace))
    return EXIT_OK


def _cmd_validate(args) -> int:
    trace = _load_trace(args.trace)
    report = validate(trace)
    for msg in report.errors:
        print(f"error: {msg}")
    for msg in report.warnings:
        print(f"warning: {msg}")
    print(f"{len(report.errors)} error(s), {len(report.warnings)} warning(s)")
    return EXIT_OK if report.ok else EXIT_DATA


def _cmd_import(args) -> int:
    events = _read_file(args.events)
    try:
        mapping = read_mapping(_read_file(args.map))
    except TraceFormatError as e:
        raise _Failure(EXIT_IO, f"{args.map}: {e}")
    try:
        trace, warnings = import_mapped(events, mapping)
    except TraceFormatError as e:
        raise _Failure(EXIT_IO, f"{args.events}: {e}")
    except MappingError as e:
        raise _Failure(EXIT_DATA, f"{args.events}: {e}")
    for msg in warnings:
        print(f"warning: {msg}", file=sys.stderr)
    _write_payload(args.out, write_trace(trace))
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="heteff", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="compute the efficiency report for a trace")
    p.add_argument("trace", help="native trace file")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--precision", type=int, choices=range(0, 7), default=2,
                   help="decimal places for text ratios (default 2)")
    p.add_argument("--show-raw", action="store_true", help="include per-resource durations")
    p.add_argument("--ascii", action="store_true", help="draw the tree with ASCII glyphs")
    p.add_argument("--out", default="-", help="output path, or - for stdout (default)")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("generate", help="build a synthetic trace from a scenario")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=PRESET_NAMES, help="named scenario preset")
    src.add_argument("--spec", help="scenario JSON file")
    p.add_argument("--scale", type=_positive_int, default=1, help="multiply all durations")
    p.add_argument("--out", required=True, help="output trace path, or - for stdout")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("validate", help="check a trace against the model invariants")
    p.add_argument("trace", help="native trace file")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("import", help="convert a trace-event timeline using a mapping")
    p.add_argument("events", help="trace-event JSON file")
    p.add_argument("--map", required=True, help="mapping JSON file")
    p.add_argument("--out", required=True, help="output trace path, or - for stdout")
    p.set_defaults(func=_cmd_import)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Failure as e:
        print(f"heteff: {e.message}", file=sys.stderr)
        return e.code


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
