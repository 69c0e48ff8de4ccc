"""Corpus loading, detection/repair evaluation and table rendering."""

from __future__ import annotations

import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, TypeVar

import yaml

from .backends import LlmBackend
from .detector import Category, DeviationReport, detect
from .errors import ManifestError
from .prompts import PromptTemplate
from .repair import DEFAULT_ATTEMPTS, RepairOutcome, matches_reference, repair
from .source_analysis import parse_source
from .spec_model import SpecModel, load_spec_file

CATEGORIES = [c.value for c in Category]
ROW_LABELS = {"Endpoint": "Endpoint", "RequestHeaders": "Request Headers", "RequestBody": "Request Body"}

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class CorpusCase:
    case_id: str
    api_name: str
    source_file: Path
    spec_file: Path
    expected_categories: tuple[str, ...]
    reference_fix: Path | None = None

    @property
    def is_control(self) -> bool:
        return not self.expected_categories


@dataclass
class Cell:
    hits: int = 0
    total: int = 0

    def text(self) -> str:
        return "n/a" if self.total == 0 else f"{self.hits}/{self.total}"

    def to_dict(self) -> dict:
        return {"hits": self.hits, "total": self.total}


@dataclass
class DetectionTable:
    apis: list[str]
    cells: dict[tuple[str, str], Cell]
    false_positives: dict[str, Cell] = field(default_factory=dict)
    reports: dict[str, DeviationReport] = field(default_factory=dict)
    detected: dict[str, bool] = field(default_factory=dict)

    def total(self, api: str) -> Cell:
        cells = [self.cells[(api, c)] for c in CATEGORIES]
        return Cell(sum(c.hits for c in cells), sum(c.total for c in cells))

    def to_dict(self) -> dict:
        return {
            "apis": {
                api: {
                    **{c: self.cells[(api, c)].to_dict() for c in CATEGORIES},
                    "Total": self.total(api).to_dict(),
                }
                for api in self.apis
            },
            "false_positives": {api: cell.to_dict() for api, cell in self.false_positives.items()},
            "cases": [
                {"id": cid, "detected": self.detected.get(cid), "report": report.to_dict()}
                for cid, report in sorted(self.reports.items())
            ],
        }


@dataclass
class FixRateTable:
    apis: list[str]
    modes: list[str]
    cells: dict[tuple[str, str, str], Cell]
    outcomes: dict[tuple[str, str], RepairOutcome] = field(default_factory=dict)
    # (case, mode) -> whether the verified candidate equals the reference fix
    reference_match: dict[tuple[str, str], bool | None] = field(default_factory=dict)

    def total(self, api: str, mode: str) -> Cell:
        cells = [self.cells[(api, c, mode)] for c in CATEGORIES]
        return Cell(sum(c.hits for c in cells), sum(c.total for c in cells))

    def to_dict(self) -> dict:
        return {
            "modes": self.modes,
            "apis": {
                api: {
                    mode: {
                        **{c: self.cells[(api, c, mode)].to_dict() for c in CATEGORIES},
                        "Total": self.total(api, mode).to_dict(),
                    }
                    for mode in self.modes
                }
                for api in self.apis
            },
            "outcomes": [
                {**o.to_dict(), "matches_reference": self.reference_match.get(key)}
                for key, o in sorted(self.outcomes.items())
            ],
        }


def load_corpus(root) -> list[CorpusCase]:
    """Load ``manifest.yaml`` from ``root`` (or ``root`` itself if it is a file)."""
    root = Path(root)
    manifest = root if root.is_file() else root / "manifest.yaml"
    if not manifest.is_file():
        raise ManifestError(f"manifest not found: {manifest}")
    try:
        entries = yaml.safe_load(manifest.read_text(encoding="utf-8")) or []
    except yaml.YAMLError as exc:
        raise ManifestError(f"malformed manifest {manifest}: {exc}") from exc
    if not isinstance(entries, list):
        raise ManifestError(f"manifest {manifest} must be a list of cases")
    base = manifest.parent
    cases: dict[str, CorpusCase] = {}
    for entry in entries:
        if not isinstance(entry, dict):
            raise ManifestError(f"manifest entry is not a mapping: {entry!r}")
        for key in ("id", "api", "source", "spec"):
            if key not in entry:
                raise ManifestError(f"manifest entry missing {key!r}: {entry!r}")
        case_id = str(entry["id"])
        if case_id in cases:
            raise ManifestError(f"duplicate case id {case_id!r}")
        expected = tuple(entry.get("expected") or ())
        for cat in expected:
            if cat not in CATEGORIES:
                raise ManifestError(f"case {case_id}: unknown category {cat!r}")
        paths = {}
        for key in ("source", "spec", "reference_fix"):
            if entry.get(key) is None:
                continue
            path = base / entry[key]
            if not path.is_file():
                raise ManifestError(f"case {case_id}: file not found: {path}")
            paths[key] = path
        cases[case_id] = CorpusCase(
            case_id=case_id,
            api_name=str(entry["api"]),
            source_file=paths["source"],
            spec_file=paths["spec"],
            expected_categories=expected,
            reference_fix=paths.get("reference_fix"),
        )
    return [cases[k] for k in sorted(cases)]


def _map_ordered(fn: Callable[[T], R], items: Iterable[T], workers: int | None) -> list[R]:
    items = list(items)
    workers = workers or os.cpu_count() or 1
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


class _SpecCache:
    def __init__(self):
        self._specs: dict[Path, SpecModel] = {}

    def __call__(self, path: Path) -> SpecModel:
        if path not in self._specs:
            self._specs[path] = load_spec_file(path)
        return self._specs[path]


def covers(found: Iterable[str], expected: Iterable[str]) -> bool:
    """Multiset coverage of expected categories by reported ones."""
    have = Counter(found)
    need = Counter(expected)
    return all(have[c] >= n for c, n in need.items())


def run_detection_eval(cases: list[CorpusCase], workers: int | None = None) -> DetectionTable:
    specs = _SpecCache()
    for case in cases:
        specs(case.spec_file)

    def one(case: CorpusCase) -> DeviationReport:
        text = case.source_file.read_text(encoding="utf-8")
        return detect(parse_source(str(case.source_file), text), specs(case.spec_file))

    reports = _map_ordered(one, cases, workers)
    apis = sorted({c.api_name for c in cases})
    table = DetectionTable(apis, {(a, c): Cell() for a in apis for c in CATEGORIES})
    for case, report in zip(cases, reports):
        table.reports[case.case_id] = report
        found = [d.category.value for d in report.deviations]
        if case.is_control:
            fp = table.false_positives.setdefault(case.api_name, Cell())
            fp.total += 1
            fp.hits += bool(found)
            continue
        hit = covers(found, case.expected_categories)
        table.detected[case.case_id] = hit
        for cat in case.expected_categories:
            cell = table.cells[(case.api_name, cat)]
            cell.total += 1
            cell.hits += hit
    return table


def run_repair_eval(
    cases: list[CorpusCase],
    backend: LlmBackend,
    modes: Iterable[str] = ("dcfix", "baseline"),
    detection: DetectionTable | None = None,
    attempts_budget: int = DEFAULT_ATTEMPTS,
    template: PromptTemplate | None = None,
    workers: int | None = None,
) -> FixRateTable:
    """Repair every detected case in every mode.

    Only cases the detector caught enter the denominators.
    """
    modes = list(modes)
    detection = detection or run_detection_eval(cases, workers)
    specs = _SpecCache()
    todo = [
        (case, mode)
        for case in cases
        if not case.is_control and detection.detected.get(case.case_id)
        for mode in modes
    ]

    def one(item: tuple[CorpusCase, str]) -> RepairOutcome:
        case, mode = item
        return repair(
            case.source_file.read_text(encoding="utf-8"),
            detection.reports[case.case_id],
            specs(case.spec_file),
            backend,
            mode=mode,
            attempts_budget=attempts_budget,
            template=template,
            case_id=case.case_id,
        )

    for case in cases:
        specs(case.spec_file)
    outcomes = _map_ordered(one, todo, workers)
    apis = sorted({case.api_name for case, _ in todo})
    table = FixRateTable(apis, modes, {(a, c, m): Cell() for a in apis for c in CATEGORIES for m in modes})
    for (case, mode), outcome in zip(todo, outcomes):
        table.outcomes[(case.case_id, mode)] = outcome
        if case.reference_fix is not None and outcome.success:
            reference = case.reference_fix.read_text(encoding="utf-8")
            table.reference_match[(case.case_id, mode)] = matches_reference(outcome.repaired_source, reference)
        for cat in case.expected_categories:
            cell = table.cells[(case.api_name, cat, mode)]
            cell.total += 1
            cell.hits += outcome.success
    return table


def _render(header: list[str], rows: list[list[str]], groups: list[tuple[str, int]] | None = None) -> str:
    """Aligned plain-text table; ``groups`` adds a spanning header row."""
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    if groups:
        # widen columns so each group label fits over its span
        col = 1
        for label, span in groups:
            avail = sum(widths[col:col + span]) + 2 * (span - 1)
            if len(label) > avail:
                widths[col + span - 1] += len(label) - avail
            col += span

    def fmt(r: list[str]) -> str:
        return "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))

    lines = []
    if groups:
        cells, col = [" " * widths[0]], 1
        for label, span in groups:
            cells.append(label.center(sum(widths[col:col + span]) + 2 * (span - 1)))
            col += span
        lines.append("  ".join(cells).rstrip())
    rule = "-" * len(fmt(header))
    lines += [fmt(header), rule]
    lines += [fmt(r) for r in rows[:-1]]
    lines += [rule, fmt(rows[-1])]
    return "\n".join(lines)


def format_detection_table(table: DetectionTable) -> str:
    header = [""] + table.apis
    rows = [[ROW_LABELS[c]] + [table.cells[(a, c)].text() for a in table.apis] for c in CATEGORIES]
    rows.append(["Total"] + [table.total(a).text() for a in table.apis])
    out = "Detection results of deviation points\n" + _render(header, rows)
    if table.false_positives:
        fps = ", ".join(f"{api}: {cell.hits}/{cell.total}" for api, cell in sorted(table.false_positives.items()))
        out += f"\nFalse positives on conforming controls: {fps}"
    return out


def format_fix_rate_table(table: FixRateTable) -> str:
    header = [""] + [m for _ in table.apis for m in table.modes]
    rows = [
        [ROW_LABELS[c]] + [table.cells[(a, c, m)].text() for a in table.apis for m in table.modes]
        for c in CATEGORIES
    ]
    rows.append(["Total"] + [table.total(a, m).text() for a in table.apis for m in table.modes])
    groups = [(a, len(table.modes)) for a in table.apis]
    return "Fix rates by prompt mode\n" + _render(header, rows, groups)
