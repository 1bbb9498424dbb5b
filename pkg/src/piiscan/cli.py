"""Command-line interface: ``piiscan scan | check-config | bench``.

Exit codes: 0 success, 1 nothing scanned or config error, 2 usage error,
3 detections found under --fail-on-detect. Every flag can be defaulted
via an environment variable with the ``PIISCAN_`` prefix (dashes become
underscores, e.g. ``PIISCAN_THRESHOLD_OVERRIDE=75``); an explicit flag
always wins.
"""

from __future__ import annotations

import argparse
import os
import shlex
import sys
from pathlib import Path

from . import __version__
from .glossary import GlossaryError, glossary_stats, load_glossary
from .ner import SubprocessNerPlugin
from .pipeline import ScanOptions, compile_glossary, scan_corpus
from .regexset import set_stats
from .report import build_report, write_report

EXIT_OK = 0
EXIT_NOTHING_SCANNED = 1
EXIT_USAGE = 2
EXIT_DETECTIONS = 3


def _env(name: str, default=None):
    return os.environ.get(f"PIISCAN_{name.upper().replace('-', '_')}", default)


def _env_flag(name: str) -> bool | None:
    raw = _env(name)
    if raw is None:
        return None
    return raw.lower() in ("1", "true", "yes", "on")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="piiscan",
        description="Glossary-driven sensitive-data scanner (single-pass multi-pattern DFA).",
    )
    parser.add_argument("--version", action="version", version=f"piiscan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="scan files/folders and write a report")
    scan.add_argument("--glossary", default=_env("glossary"), help="glossary YAML path")
    scan.add_argument("--input", action="append", default=None, help="file or folder (repeatable)")
    scan.add_argument("--format", choices=["json", "csv"], default=_env("format", "json"))
    scan.add_argument("--out", default=_env("out"), help="report file (default: stdout)")
    scan.add_argument("--workers", type=int, default=int(_env("workers", "1")))
    scan.add_argument(
        "--threshold-override",
        type=float,
        default=float(_env("threshold-override")) if _env("threshold-override") else None,
        help="replace every pattern's threshold with this value",
    )
    scan.add_argument("--ner", default=_env("ner"), help="NER plugin command (subprocess protocol)")
    redact = scan.add_mutually_exclusive_group()
    redact.add_argument("--redact", dest="redact", action="store_true", default=None)
    redact.add_argument("--reveal", dest="redact", action="store_false")
    scan.add_argument(
        "--fail-on-detect",
        action="store_true",
        default=_env_flag("fail-on-detect") or False,
        help="exit 3 when any detection is reported (CI gating)",
    )
    scan.add_argument(
        "--stable-report",
        action="store_true",
        default=_env_flag("stable-report") or False,
        help="zero timing fields so repeated runs serialize identically",
    )

    check = sub.add_parser("check-config", help="load and compile a glossary, print stats")
    check.add_argument("--glossary", default=_env("glossary"), help="glossary YAML path")
    check.add_argument("--dump-dfa", default=None, help="write the automaton as DOT to this path")

    bench = sub.add_parser("bench", help="synthetic corpus benchmarks")
    bench.add_argument("--mode", choices=["scaling", "accuracy"], required=True)
    bench.add_argument("--sizes", default="64,128,256,512", help="corpus sizes in MB (scaling)")
    bench.add_argument("--patterns", default="100,150,172", help="pattern counts (scaling)")
    bench.add_argument("--corpus-mb", type=int, default=8, help="corpus size in MB (accuracy)")
    bench.add_argument("--seed", type=int, default=int(_env("seed", "42")))
    bench.add_argument("--out", default=_env("out"), help="results JSON path (default: stdout)")
    bench.add_argument("--workdir", default=None, help="directory for generated corpora (default: temp)")
    bench.add_argument("--keep", action="store_true", help="keep generated corpora")
    return parser


def _cmd_scan(args) -> int:
    if not args.glossary:
        print("error: --glossary is required (or set PIISCAN_GLOSSARY)", file=sys.stderr)
        return EXIT_USAGE
    inputs = args.input
    if not inputs:
        env_input = _env("input")
        inputs = [env_input] if env_input else []
    if not inputs:
        print("error: at least one --input is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        glossary = load_glossary(args.glossary)
    except (GlossaryError, OSError) as exc:
        print(f"error: cannot load glossary: {exc}", file=sys.stderr)
        return EXIT_NOTHING_SCANNED

    redact = args.redact if args.redact is not None else (_env_flag("redact") if _env_flag("redact") is not None else True)
    plugin = SubprocessNerPlugin(shlex.split(args.ner)) if args.ner else None
    compiled = compile_glossary(glossary)
    options = ScanOptions(
        workers=max(1, args.workers),
        threshold_override=args.threshold_override,
        ner_plugin=plugin,
    )
    result = scan_corpus(inputs, compiled, options)
    if plugin is not None:
        plugin.close()

    report = build_report(result, redact=redact, stable=args.stable_report)
    payload = write_report(report, args.format)
    if args.out:
        Path(args.out).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)

    detections = report.aggregate["detections"]
    print(
        f"scanned {report.aggregate['files']} file(s), {report.aggregate['bytes']} bytes: "
        f"{detections} detection(s)",
        file=sys.stderr,
    )
    if report.aggregate["files"] == 0:
        print("error: no files scanned", file=sys.stderr)
        return EXIT_NOTHING_SCANNED
    if args.fail_on_detect and detections > 0:
        return EXIT_DETECTIONS
    return EXIT_OK


def _cmd_check_config(args) -> int:
    if not args.glossary:
        print("error: --glossary is required (or set PIISCAN_GLOSSARY)", file=sys.stderr)
        return EXIT_USAGE
    try:
        glossary = load_glossary(args.glossary)
        compiled = compile_glossary(glossary)
    except (GlossaryError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOTHING_SCANNED
    stats = glossary_stats(glossary)
    dfa = set_stats(compiled.pattern_set)
    print(f"glossary version: {glossary.version}")
    print(f"patterns: {stats['pattern_count']}")
    print(f"regexes: {stats['regex_count']}")
    print(f"keywords: {stats['keyword_count']}")
    print(f"dfa states: {dfa['state_count']}")
    print(f"dfa memory estimate: {dfa['memory_bytes_estimate']} bytes"
          + (" (lazy)" if compiled.pattern_set.lazy else ""))
    print(f"keyword automaton nodes: {compiled.automaton.node_count()}")
    print(f"chunk overlap: {compiled.overlap} bytes")
    if args.dump_dfa:
        Path(args.dump_dfa).write_text(compiled.pattern_set.to_dot(), encoding="utf-8")
        print(f"dfa dot written to {args.dump_dfa}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    import json
    import tempfile

    from .bench import runner

    if args.workdir:
        workdir = Path(args.workdir)
        workdir.mkdir(parents=True, exist_ok=True)
        cleanup = not args.keep
    else:
        workdir = Path(tempfile.mkdtemp(prefix="piiscan-bench-"))
        cleanup = not args.keep

    try:
        if args.mode == "scaling":
            sizes = [int(s) for s in args.sizes.split(",") if s]
            counts = [int(c) for c in args.patterns.split(",") if c]
            results = runner.run_scaling(sizes, counts, seed=args.seed, workdir=workdir)
        else:
            results = runner.run_accuracy_suite(corpus_mb=args.corpus_mb, seed=args.seed, workdir=workdir)
        payload = json.dumps(results, indent=2, sort_keys=True).encode("utf-8") + b"\n"
        if args.out:
            Path(args.out).write_bytes(payload)
        else:
            sys.stdout.buffer.write(payload)
        return EXIT_OK
    finally:
        if cleanup:
            import shutil

            shutil.rmtree(workdir, ignore_errors=True)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.command == "scan":
        return _cmd_scan(args)
    if args.command == "check-config":
        return _cmd_check_config(args)
    return _cmd_bench(args)


if __name__ == "__main__":
    sys.exit(main())
