"""Exception types raised across restfix."""

from __future__ import annotations


class RestfixError(Exception):
    """Base class for all restfix errors."""


class ParseError(RestfixError):
    """A specification document could not be decoded."""


class SpecError(RestfixError):
    """A specification decoded fine but violates the model's rules."""


class TemplateError(RestfixError):
    """A path template is malformed."""


class SourceSyntaxError(RestfixError):
    """Client source could not be parsed."""

    def __init__(self, file_path: str, line: int, col: int, msg: str):
        super().__init__(f"{file_path}:{line}:{col}: {msg}")
        self.file_path = file_path
        self.line = line
        self.col = col
        self.msg = msg


class NotAMapping(RestfixError):
    """An expression cannot be traced back to a dict literal."""


class EmptyReport(RestfixError):
    """A dcfix prompt was requested for a report with no deviations."""


class BackendError(RestfixError):
    """An LLM backend call failed or timed out."""


class ManifestError(RestfixError):
    """A corpus manifest is invalid or references missing files."""
