"""Repair loop: prompt the backend, extract code, verify by re-detection."""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass
from enum import Enum

from .backends import LlmBackend
from .detector import DeviationReport, detect
from .errors import BackendError, SourceSyntaxError
from .prompts import PromptTemplate, build_baseline_prompt, build_prompt
from .source_analysis import parse_source
from .spec_model import SpecModel

DEFAULT_ATTEMPTS = 5

_FENCE = re.compile(r"```[^\n`]*\n(.*?)(?:\n?```|\Z)", re.DOTALL)


class FailureReason(str, Enum):
    NO_CODE_BLOCK = "NoCodeBlock"
    SYNTAX_ERROR = "SyntaxError"
    DEVIATIONS_REMAIN = "DeviationsRemain"
    BACKEND_ERROR = "BackendError"


@dataclass(frozen=True)
class Attempt:
    prompt_mode: str
    raw_response: str
    extracted_source: str | None
    verified: bool
    failure_reason: FailureReason | None = None

    def to_dict(self) -> dict:
        return {
            "prompt_mode": self.prompt_mode,
            "raw_response": self.raw_response,
            "extracted_source": self.extracted_source,
            "verified": self.verified,
            "failure_reason": self.failure_reason.value if self.failure_reason else None,
        }


@dataclass(frozen=True)
class RepairOutcome:
    case_id: str
    attempts: tuple[Attempt, ...]
    attempts_budget: int
    mode: str = "dcfix"

    @property
    def success(self) -> bool:
        return any(a.verified for a in self.attempts)

    @property
    def repaired_source(self) -> str | None:
        for a in self.attempts:
            if a.verified:
                return a.extracted_source
        return None

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "mode": self.mode,
            "success": self.success,
            "attempts_budget": self.attempts_budget,
            "attempts": [a.to_dict() for a in self.attempts],
        }


def _parses(text: str) -> bool:
    try:
        ast.parse(text)
    except (SyntaxError, ValueError):
        return False
    return True


def extract_code_block(response: str) -> str | None:
    m = _FENCE.search(response)
    if m:
        return m.group(1)
    if response.strip() and _parses(response):
        return response
    return None


def matches_reference(candidate: str, reference: str) -> bool:
    """Textual comparison ignoring trailing whitespace and blank lines."""

    def norm(text: str) -> list[str]:
        return [line.rstrip() for line in text.strip().splitlines() if line.strip()]

    return norm(candidate) == norm(reference)


def verify_repair(candidate_source: str, spec: SpecModel, previous: DeviationReport | None = None) -> bool:
    """True when the candidate parses and re-detection is clean.

    Skipped checks also fail verification: everywhere when ``previous`` is
    not given, otherwise only for categories that previously deviated.
    """
    try:
        report = detect(parse_source("<candidate>", candidate_source), spec)
    except SourceSyntaxError:
        return False
    if report.deviations:
        return False
    if previous is None:
        return not report.skipped
    prior = {d.category.value for d in previous.deviations}
    return not any(w.category in prior for w in report.skipped)


def repair(
    source_text: str,
    report: DeviationReport,
    spec: SpecModel,
    backend: LlmBackend,
    mode: str = "dcfix",
    attempts_budget: int = DEFAULT_ATTEMPTS,
    template: PromptTemplate | None = None,
    case_id: str = "",
) -> RepairOutcome:
    if attempts_budget < 1:
        raise ValueError("attempts_budget must be at least 1")
    if mode == "dcfix":
        prompt = build_prompt(source_text, report, template)
    elif mode == "baseline":
        prompt = build_baseline_prompt(source_text, template)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    text = prompt.text
    attempts: list[Attempt] = []
    for k in range(1, attempts_budget + 1):
        try:
            raw = backend.complete(text, case_id=case_id, attempt=k, mode=mode)
        except BackendError as exc:
            attempts.append(Attempt(mode, str(exc), None, False, FailureReason.BACKEND_ERROR))
            continue
        code = extract_code_block(raw)
        if code is None:
            attempts.append(Attempt(mode, raw, None, False, FailureReason.NO_CODE_BLOCK))
            continue
        if not _parses(code):
            attempts.append(Attempt(mode, raw, code, False, FailureReason.SYNTAX_ERROR))
            continue
        if verify_repair(code, spec, report):
            attempts.append(Attempt(mode, raw, code, True))
            break
        attempts.append(Attempt(mode, raw, code, False, FailureReason.DEVIATIONS_REMAIN))
    return RepairOutcome(case_id, tuple(attempts), attempts_budget, mode)
