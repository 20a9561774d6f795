"""Command-line front door.

Exit codes: 0 clean (for analyze: no question-worthy findings),
1 parse failure, 2 usage error, 3 analyze found question-worthy
diagnostics.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .. import __version__
from ..session import aggregate
from .service import InquiryService, RpcError, encode
from .transport import serve_http, serve_stdio


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inq",
        description="Question-first analysis for NovLang programs")
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser(
        "analyze", help="detect misconception smells in a source file")
    p_analyze.add_argument("file")
    p_analyze.add_argument("--format", choices=("json", "text"),
                           default="text")

    p_run = sub.add_parser("run", help="run a program with queued inputs")
    p_run.add_argument("file")
    p_run.add_argument("--input", action="append", default=[],
                       metavar="LINE", help="queue one input line "
                       "(repeatable, consumed in order)")
    p_run.add_argument("--budget", type=int, default=None,
                       metavar="N", help="step budget for the bounded run")

    p_serve = sub.add_parser("serve", help="serve the JSON-RPC gateway")
    mode = p_serve.add_mutually_exclusive_group(required=True)
    mode.add_argument("--stdio", action="store_true",
                      help="newline-delimited envelopes on stdin/stdout")
    mode.add_argument("--http", type=int, metavar="PORT",
                      help="HTTP POST /rpc on the given port")
    p_serve.add_argument("--host", default="127.0.0.1")

    p_report = sub.add_parser(
        "report", help="aggregate an event log into an instructor report")
    p_report.add_argument("logdir")
    p_report.add_argument("--csv", action="store_true",
                          help="emit category,count CSV instead of JSON")

    sub.add_parser("version", help="print the engine version")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "analyze": _cmd_analyze,
        "run": _cmd_run,
        "serve": _cmd_serve,
        "report": _cmd_report,
        "version": _cmd_version,
    }[args.command]
    return handler(args)


def _read_source(path_text: str) -> str:
    path = Path(path_text)
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"inq: cannot read {path}: {exc.strerror or exc}",
              file=sys.stderr)
        raise SystemExit(2)


def _cmd_analyze(args: argparse.Namespace) -> int:
    source = _read_source(args.file)
    service = InquiryService.from_env()
    try:
        result = service.call("analyze", {"source": source})
    except RpcError as exc:
        if exc.code == 422:
            for chunk in exc.message.split("; "):
                print(f"{args.file}:{chunk}", file=sys.stderr)
            return 1
        print(f"inq: {exc.message}", file=sys.stderr)
        return 2
    if args.format == "json":
        print(encode(result))
    else:
        _print_findings(result["diagnostics"])
    worthy = sum(1 for d in result["diagnostics"]
                 if d["severity"] == "question-worthy")
    return 3 if worthy else 0


def _print_findings(diagnostics: list[dict]) -> None:
    if not diagnostics:
        print("no findings")
        return
    for d in diagnostics:
        line = d["span"]["start_line"]
        tag = " (note)" if d["severity"] == "info" else ""
        print(f"line {line}: [{d['rule_id']}] {d['message']}{tag}")
    worthy = sum(1 for d in diagnostics
                 if d["severity"] == "question-worthy")
    notes = len(diagnostics) - worthy
    print(f"{worthy} question-worthy finding(s), {notes} note(s)")


def _cmd_run(args: argparse.Namespace) -> int:
    source = _read_source(args.file)
    params: dict = {"source": source, "inputs": list(args.input)}
    if args.budget is not None:
        params["budget"] = args.budget
    service = InquiryService.from_env()
    try:
        result = service.call("run", params)
    except RpcError as exc:
        if exc.code == 422:
            for chunk in exc.message.split("; "):
                print(f"{args.file}:{chunk}", file=sys.stderr)
            return 1
        print(f"inq: {exc.message}", file=sys.stderr)
        return 2
    sys.stdout.write(result["stdout"])
    sys.stdout.flush()
    status = result["status"]
    if status["code"] != "Completed":
        detail = status.get("kind") or status.get("message") or ""
        suffix = f": {detail}" if detail else ""
        print(f"[{status['code']}{suffix} after {result['steps_used']} "
              "steps]", file=sys.stderr)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    service = InquiryService.from_env()
    if args.stdio:
        return serve_stdio(service)
    return serve_http(service, args.http, args.host)


def _cmd_report(args: argparse.Namespace) -> int:
    logdir = Path(args.logdir)
    if not logdir.exists():
        print(f"inq: no such log path: {logdir}", file=sys.stderr)
        return 2
    report = aggregate(logdir)
    if args.csv:
        sys.stdout.write(report.to_csv())
    else:
        print(encode(report.as_dict()))
    return 0


def _cmd_version(args: argparse.Namespace) -> int:
    print(f"inq {__version__}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
