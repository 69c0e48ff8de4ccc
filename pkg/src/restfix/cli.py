"""restfix command line: detect, repair and eval.

Exit codes: 0 clean / success, 1 findings / repair failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .backends import load_backend_config, make_backend
from .demo_corpus import bundled_manifest
from .detector import DeviationReport, detect
from .errors import ManifestError, ParseError, SourceSyntaxError, SpecError
from .harness import (
    format_detection_table,
    format_fix_rate_table,
    load_corpus,
    run_detection_eval,
    run_repair_eval,
)
from .prompts import MODES, PromptTemplate
from .repair import DEFAULT_ATTEMPTS, repair
from .source_analysis import parse_source
from .spec_model import load_spec_file

EXIT_CLEAN = 0
EXIT_FINDINGS = 1
EXIT_ERROR = 2


class UsageError(Exception):
    pass


def _positive_int(raw: str) -> int:
    value = int(raw)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="restfix",
        description="Detect REST API misuses in client code and repair them with an LLM.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("--format", choices=("text", "json"), default="text")

    def backend_opts(p: argparse.ArgumentParser, required: bool):
        p.add_argument("--backend", choices=("mock", "http"), required=required)
        p.add_argument("--backend-config", help="YAML/JSON backend settings; credentials come from env vars it names")
        p.add_argument("--attempts", type=_positive_int, default=DEFAULT_ATTEMPTS)
        p.add_argument("--template", help="prompt template file containing ${target program}")

    p = sub.add_parser("detect", help="report deviation points")
    p.add_argument("--spec", required=True)
    p.add_argument("files", nargs="+")
    common(p)

    p = sub.add_parser("repair", help="detect, then ask the backend for a verified fix")
    p.add_argument("--spec", required=True)
    p.add_argument("file")
    p.add_argument("--mode", choices=MODES, default="dcfix")
    p.add_argument("--out", help="where to write the repaired source (default: <name>.fixed<ext>)")
    p.add_argument("--case-id", help="key for mock fixtures (default: file stem)")
    backend_opts(p, required=True)
    common(p)

    p = sub.add_parser("eval", help="run detection (and repair) over a corpus manifest")
    p.add_argument("manifest", nargs="?", help="manifest file or corpus directory")
    p.add_argument("--demo", action="store_true", help="use the bundled demo corpus")
    p.add_argument("--mode", choices=MODES, action="append", help="repeatable; default: both modes")
    p.add_argument("--out", help="also write the JSON result to this path")
    p.add_argument("--workers", type=_positive_int)
    backend_opts(p, required=False)
    common(p)
    return parser


def _load_spec(path: str):
    try:
        return load_spec_file(path)
    except OSError as exc:
        raise UsageError(f"cannot read spec {path}: {exc.strerror or exc}") from exc
    except (ParseError, SpecError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _backend(args):
    if not args.backend:
        return None
    config = load_backend_config(args.backend_config) if args.backend_config else {}
    try:
        return make_backend(args.backend, config)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _template(args) -> PromptTemplate | None:
    if not args.template:
        return None
    try:
        return PromptTemplate.from_file(args.template)
    except (OSError, ValueError) as exc:
        raise UsageError(f"template {args.template}: {exc}") from exc


def format_report_text(report: DeviationReport) -> str:
    lines = []
    for d in report.deviations:
        for u in d.unsatisfied:
            lines.append(f"{report.file_path}:{d.span.start_line}:{d.span.start_col + 1}: {d.category.value}: {u.description}")
    for w in report.warnings:
        loc = f"{w.span.start_line}:{w.span.start_col + 1}" if w.span else "-"
        lines.append(f"{report.file_path}:{loc}: warning[{w.code}]: {w.message}")
    lines.append(
        f"{report.file_path}: {len(report.deviations)} deviation(s), "
        f"{report.call_sites_analyzed} call site(s) analyzed"
    )
    return "\n".join(lines)


def cmd_detect(args) -> int:
    spec = _load_spec(args.spec)
    reports = []
    for path in args.files:
        model = parse_source(path, _read(path))
        reports.append(detect(model, spec))
    if args.format == "json":
        payload = [r.to_dict() for r in reports]
        print(json.dumps(payload[0] if len(payload) == 1 else payload, indent=2))
    else:
        print("\n".join(format_report_text(r) for r in reports))
    return EXIT_FINDINGS if any(r.deviations for r in reports) else EXIT_CLEAN


def _default_out(path: str) -> Path:
    p = Path(path)
    return p.with_name(f"{p.stem}.fixed{p.suffix}")


def cmd_repair(args) -> int:
    spec = _load_spec(args.spec)
    source = _read(args.file)
    template = _template(args)
    backend = _backend(args)
    report = detect(parse_source(args.file, source), spec)
    if not report.deviations:
        if args.format == "json":
            print(json.dumps({"report": report.to_dict(), "outcome": None}, indent=2))
        else:
            print("nothing to repair")
        return EXIT_CLEAN
    outcome = repair(
        source,
        report,
        spec,
        backend,
        mode=args.mode,
        attempts_budget=args.attempts,
        template=template,
        case_id=args.case_id or Path(args.file).stem,
    )
    out_path = None
    if outcome.success:
        out_path = Path(args.out) if args.out else _default_out(args.file)
        fixed = outcome.repaired_source
        out_path.write_text(fixed if fixed.endswith("\n") else fixed + "\n", encoding="utf-8")
    if args.format == "json":
        print(json.dumps({"report": report.to_dict(), "outcome": outcome.to_dict(),
                          "output": str(out_path) if out_path else None}, indent=2))
    else:
        print(format_report_text(report))
        for i, a in enumerate(outcome.attempts, 1):
            status = "verified" if a.verified else a.failure_reason.value
            print(f"attempt {i}/{outcome.attempts_budget}: {status}")
        if out_path:
            print(f"repaired source written to {out_path}")
        else:
            print("repair failed: no attempt verified")
    return EXIT_CLEAN if outcome.success else EXIT_FINDINGS


def cmd_eval(args) -> int:
    if args.demo:
        target = bundled_manifest()
    elif args.manifest:
        target = args.manifest
    else:
        raise UsageError("eval needs a manifest path or --demo")
    try:
        cases = load_corpus(target)
    except ManifestError as exc:
        raise UsageError(str(exc)) from exc
    backend = _backend(args)
    template = _template(args)
    try:
        detection = run_detection_eval(cases, workers=args.workers)
    except (ParseError, SpecError, SourceSyntaxError) as exc:
        raise UsageError(str(exc)) from exc
    result = {"detection": detection.to_dict()}
    texts = [format_detection_table(detection)]
    if backend is not None:
        modes = args.mode or list(MODES)
        fixes = run_repair_eval(
            cases,
            backend,
            modes=modes,
            detection=detection,
            attempts_budget=args.attempts,
            template=template,
            workers=args.workers,
        )
        result["repair"] = fixes.to_dict()
        texts.append(format_fix_rate_table(fixes))
    if args.out:
        Path(args.out).write_text(json.dumps(result, indent=2) + "\n", encoding="utf-8")
    if args.format == "json":
        print(json.dumps(result, indent=2))
    else:
        print("\n\n".join(texts))
    return EXIT_CLEAN


COMMANDS = {"detect": cmd_detect, "repair": cmd_repair, "eval": cmd_eval}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except SourceSyntaxError as exc:
        print(f"error: syntax error at {exc}", file=sys.stderr)
        return EXIT_ERROR
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
