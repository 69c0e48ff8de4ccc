"""Render repair prompts from a text template."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .detector import Category, DeviationPoint, DeviationReport
from .errors import EmptyReport

PLACEHOLDER = "${target program}"
MODES = ("dcfix", "baseline")


@dataclass(frozen=True)
class PromptTemplate:
    text: str

    def __post_init__(self):
        if self.text.count(PLACEHOLDER) != 1:
            raise ValueError(f"template must contain {PLACEHOLDER!r} exactly once")

    @classmethod
    def default(cls) -> "PromptTemplate":
        return cls(resources.files("restfix").joinpath("templates/dcfix.txt").read_text(encoding="utf-8"))

    @classmethod
    def from_file(cls, path) -> "PromptTemplate":
        with open(path, encoding="utf-8") as f:
            return cls(f.read())

    @property
    def instructions(self) -> str:
        return self.text.split(PLACEHOLDER, 1)[0]


@dataclass(frozen=True)
class RepairPrompt:
    system_instructions: str
    program_block: str
    deviation_annotations: tuple[str, ...]
    mode: str
    template: PromptTemplate

    @property
    def text(self) -> str:
        insert = "".join(self.deviation_annotations) + self.program_block
        return self.template.text.replace(PLACEHOLDER, insert, 1)


def describe_required(dp: DeviationPoint) -> str:
    pieces = []
    for u in dp.unsatisfied:
        exp = u.expected
        if u.category is Category.ENDPOINT:
            if exp["candidates"]:
                pieces.append(f"{' or '.join(exp['candidates'])} (found {exp['actual']})")
            else:
                pieces.append(f"an endpoint declared by the API specification (found {exp['actual']})")
        elif u.category is Category.REQUEST_HEADERS:
            pieces.append(f"request headers {', '.join(exp['missing'])} for {exp['endpoint']}")
        else:
            parts = []
            if exp["missing"]:
                parts.append(f"body fields {', '.join(exp['missing'])}")
            for m in exp["mismatched"]:
                parts.append(f"body field {m['field']} = {m['expected']} (found {m['actual']})")
            pieces.append(f"{'; '.join(parts)} for {exp['endpoint']}")
    return "; ".join(pieces)


def annotate(dp: DeviationPoint) -> str:
    return f"Line {dp.span.start_line}: {dp.category.value} deviation — required: {describe_required(dp)}\n"


def build_prompt(source_text: str, report: DeviationReport, template: PromptTemplate | None = None) -> RepairPrompt:
    if not report.deviations:
        raise EmptyReport(f"no deviations reported for {report.file_path}")
    template = template or PromptTemplate.default()
    return RepairPrompt(
        system_instructions=template.instructions,
        program_block=source_text,
        deviation_annotations=tuple(annotate(dp) for dp in report.deviations),
        mode="dcfix",
        template=template,
    )


def build_baseline_prompt(source_text: str, template: PromptTemplate | None = None) -> RepairPrompt:
    template = template or PromptTemplate.default()
    return RepairPrompt(
        system_instructions=template.instructions,
        program_block=source_text,
        deviation_annotations=(),
        mode="baseline",
        template=template,
    )
