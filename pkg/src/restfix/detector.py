"""Compare resolved call sites against a spec and report deviation points."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Any

from .source_analysis import (
    AnalysisWarning,
    CallSite,
    SourceModel,
    Span,
    canonical_scalar,
    extract_call_sites,
    parse_source,
)
from .spec_model import (
    CANDIDATE_MAX_DISTANCE,
    WILDCARD,
    Candidate,
    EndpointMatch,
    EndpointSpec,
    SpecModel,
    lookup_endpoint,
    split_concrete_path,
)


class Category(str, Enum):
    ENDPOINT = "Endpoint"
    REQUEST_HEADERS = "RequestHeaders"
    REQUEST_BODY = "RequestBody"

    def __str__(self) -> str:
        return self.value


CATEGORY_ORDER = {c: i for i, c in enumerate(Category)}


class Skipped(Exception):
    """A check could not reach a verdict; carries the warning to report."""

    def __init__(self, warning: AnalysisWarning):
        super().__init__(warning.message)
        self.warning = warning


@dataclass(frozen=True)
class UnsatisfiedSpecification:
    category: Category
    description: str
    expected: dict[str, Any]

    def to_dict(self) -> dict:
        return {"category": self.category.value, "description": self.description, "expected": self.expected}

    @classmethod
    def from_dict(cls, d: dict) -> "UnsatisfiedSpecification":
        return cls(Category(d["category"]), d["description"], d["expected"])


@dataclass(frozen=True)
class DeviationPoint:
    category: Category
    span: Span
    call_span: Span
    unsatisfied: tuple[UnsatisfiedSpecification, ...]

    def to_dict(self) -> dict:
        return {
            "category": self.category.value,
            "span": self.span.to_dict(),
            "call_span": self.call_span.to_dict(),
            "unsatisfied": [u.to_dict() for u in self.unsatisfied],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DeviationPoint":
        return cls(
            Category(d["category"]),
            Span(**d["span"]),
            Span(**d["call_span"]),
            tuple(UnsatisfiedSpecification.from_dict(u) for u in d["unsatisfied"]),
        )


@dataclass(frozen=True)
class DeviationReport:
    file_path: str
    spec_name: str
    deviations: tuple[DeviationPoint, ...] = ()
    warnings: tuple[AnalysisWarning, ...] = ()
    call_sites_analyzed: int = 0

    @property
    def categories(self) -> list[Category]:
        return [d.category for d in self.deviations]

    @property
    def skipped(self) -> list[AnalysisWarning]:
        return [w for w in self.warnings if w.is_skip]

    def to_dict(self) -> dict:
        return {
            "file": self.file_path,
            "spec": self.spec_name,
            "call_sites_analyzed": self.call_sites_analyzed,
            "deviations": [d.to_dict() for d in self.deviations],
            "warnings": [w.to_dict() for w in self.warnings],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DeviationReport":
        return cls(
            file_path=d["file"],
            spec_name=d["spec"],
            deviations=tuple(DeviationPoint.from_dict(x) for x in d["deviations"]),
            warnings=tuple(
                AnalysisWarning(
                    w["code"], w["message"], Span(**w["span"]) if w.get("span") else None, w.get("category")
                )
                for w in d["warnings"]
            ),
            call_sites_analyzed=d["call_sites_analyzed"],
        )


def _split_site(site: CallSite, spec: SpecModel) -> tuple[list[str], list[str], bool]:
    """Split the URL after the domain into (full path, relative path, base ok)."""
    pattern = site.url.pattern()
    idx = pattern.find(spec.domain)
    rest = pattern[idx + len(spec.domain):]
    rest = re.sub(r"^:[0-9]+", "", rest)
    rest = rest.split("?", 1)[0].split("#", 1)[0]
    segments = split_concrete_path(rest)
    if WILDCARD in rest and not any(seg.replace(WILDCARD, "") for seg in segments):
        raise Skipped(
            AnalysisWarning(
                "skipped-endpoint",
                f"endpoint path is statically unknown: {site.url.display()}",
                site.endpoint_def_span,
                Category.ENDPOINT.value,
            )
        )
    base_segs = split_concrete_path(spec.base_path)
    if segments[: len(base_segs)] == base_segs:
        return segments, segments[len(base_segs):], True
    return segments, segments, False


def site_path(site: CallSite, spec: SpecModel) -> str:
    """Path of a call site's URL relative to the spec's base path.

    Unknown URL parts appear as :data:`WILDCARD`. Raises :class:`Skipped`
    when nothing of the path is statically known.
    """
    return "/" + "/".join(_split_site(site, spec)[1])


def _match(site: CallSite, spec: SpecModel) -> EndpointMatch:
    _, relative, base_ok = _split_site(site, spec)
    match = lookup_endpoint(spec, site.method, "/" + "/".join(relative))
    if base_ok:
        return match
    # the URL skips the base path: whatever it resembles is off by that prefix
    penalty = len(split_concrete_path(spec.base_path))
    if match.is_exact:
        return EndpointMatch(None, (Candidate(match.endpoint, penalty),))
    return EndpointMatch(
        None,
        tuple(
            Candidate(c.endpoint, c.distance + penalty)
            for c in match.candidates
            if c.distance + penalty <= CANDIDATE_MAX_DISTANCE
        ),
    )


def _endpoint_deviation(site: CallSite, spec: SpecModel, match: EndpointMatch) -> DeviationPoint:
    full = _split_site(site, spec)[0]
    actual = f"{site.method} /{'/'.join(full).replace(WILDCARD, '*')}"
    nearest = [c for c in match.candidates if c.distance == match.candidates[0].distance]
    candidates = [f"{c.endpoint.method} {spec.base_path}{c.endpoint.path}" for c in nearest]
    if candidates:
        desc = f"{actual} is not declared by the API; nearest: {', '.join(candidates)}"
    else:
        desc = f"{actual} is not declared by the API"
    unsat = UnsatisfiedSpecification(Category.ENDPOINT, desc, {"actual": actual, "candidates": candidates})
    return DeviationPoint(Category.ENDPOINT, site.endpoint_def_span, site.call_span, (unsat,))


def check_endpoint(site: CallSite, spec: SpecModel) -> DeviationPoint | None:
    match = _match(site, spec)
    if match.is_exact:
        return None
    return _endpoint_deviation(site, spec, match)


def check_headers(site: CallSite, spec: SpecModel, endpoint: EndpointSpec) -> DeviationPoint | None:
    declared = {k.lower() for k in site.headers.known_keys()} if site.headers else set()
    missing = [h for h in endpoint.required_headers if h.lower() not in declared]
    if not missing:
        return None
    span = site.header_def_span or site.call_span
    if site.headers is not None and (site.headers.has_unknown_spread or site.headers.has_unknown_key):
        raise Skipped(
            AnalysisWarning(
                "skipped-headers",
                f"cannot prove headers {', '.join(missing)} absent: map has unresolved parts",
                span,
                Category.REQUEST_HEADERS.value,
            )
        )
    unsat = UnsatisfiedSpecification(
        Category.REQUEST_HEADERS,
        f"required request headers not declared: {', '.join(missing)}",
        {"endpoint": endpoint.label(), "missing": missing},
    )
    return DeviationPoint(Category.REQUEST_HEADERS, span, site.call_span, (unsat,))


def check_body(site: CallSite, spec: SpecModel, endpoint: EndpointSpec) -> DeviationPoint | None:
    body = site.body
    declared = set(body.known_keys()) if body else set()
    missing = [f.name for f in endpoint.required_body_fields if f.name not in declared]
    mismatched = []
    for f in endpoint.required_body_fields:
        if f.fixed_value is None or f.name not in declared:
            continue
        actual = body.get(f.name)
        expected = canonical_scalar(f.fixed_value)
        if actual is not None and actual.fully_known and actual.value != expected:
            mismatched.append({"field": f.name, "expected": expected, "actual": actual.value})
    if not missing and not mismatched:
        return None
    span = site.body_def_span or site.call_span
    if body is not None and (body.has_unknown_spread or body.has_unknown_key):
        raise Skipped(
            AnalysisWarning(
                "skipped-body",
                "cannot check request body: map has unresolved parts",
                span,
                Category.REQUEST_BODY.value,
            )
        )
    problems = []
    if missing:
        problems.append(f"missing required fields: {', '.join(missing)}")
    for m in mismatched:
        problems.append(f"{m['field']} must be {m['expected']} (found {m['actual']})")
    unsat = UnsatisfiedSpecification(
        Category.REQUEST_BODY,
        "; ".join(problems),
        {"endpoint": endpoint.label(), "missing": missing, "mismatched": mismatched},
    )
    return DeviationPoint(Category.REQUEST_BODY, span, site.call_span, (unsat,))


def detect(model: SourceModel, spec: SpecModel) -> DeviationReport:
    sites, warnings = extract_call_sites(model, spec)
    warnings = list(warnings)
    found: list[DeviationPoint] = []

    def note(w: AnalysisWarning):
        if w not in warnings:
            warnings.append(w)

    for site in sites:
        try:
            match = _match(site, spec)
        except Skipped as s:
            note(s.warning)
            continue
        if match.is_exact:
            target = match.endpoint
        else:
            found.append(_endpoint_deviation(site, spec, match))
            nearest = [c for c in match.candidates if c.distance == match.candidates[0].distance]
            target = nearest[0].endpoint if len(nearest) == 1 else None
        if target is None:
            continue
        for check in (check_headers, check_body):
            try:
                dp = check(site, spec, target)
            except Skipped as s:
                note(s.warning)
                continue
            if dp is not None:
                found.append(dp)

    unique: list[DeviationPoint] = []
    seen = set()
    for dp in found:
        key = (dp.category, dp.span, repr([u.to_dict() for u in dp.unsatisfied]))
        if key not in seen:
            seen.add(key)
            unique.append(dp)
    unique.sort(key=lambda d: (d.span, CATEGORY_ORDER[d.category], d.call_span))
    return DeviationReport(
        file_path=model.file_path,
        spec_name=spec.api_name,
        deviations=tuple(unique),
        warnings=tuple(warnings),
        call_sites_analyzed=len(sites),
    )


def detect_text(file_path: str, text: str, spec: SpecModel) -> DeviationReport:
    return detect(parse_source(file_path, text), spec)
