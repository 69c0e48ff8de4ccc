"""Detect REST API misuses in client code and repair them with an LLM."""

from .detector import Category, DeviationPoint, DeviationReport, detect, detect_text
from .errors import (
    BackendError,
    EmptyReport,
    ManifestError,
    NotAMapping,
    ParseError,
    SourceSyntaxError,
    SpecError,
    TemplateError,
)
from .prompts import PromptTemplate, build_baseline_prompt, build_prompt
from .repair import RepairOutcome, extract_code_block, repair, verify_repair
from .source_analysis import parse_source
from .spec_model import SpecModel, load_spec, load_spec_file, lookup_endpoint, parse_path_template

__version__ = "0.1.0"

__all__ = [
    "BackendError",
    "Category",
    "DeviationPoint",
    "DeviationReport",
    "EmptyReport",
    "ManifestError",
    "NotAMapping",
    "ParseError",
    "PromptTemplate",
    "RepairOutcome",
    "SourceSyntaxError",
    "SpecError",
    "SpecModel",
    "TemplateError",
    "build_baseline_prompt",
    "build_prompt",
    "detect",
    "detect_text",
    "extract_code_block",
    "load_spec",
    "load_spec_file",
    "lookup_endpoint",
    "parse_path_template",
    "parse_source",
    "repair",
    "verify_repair",
]
