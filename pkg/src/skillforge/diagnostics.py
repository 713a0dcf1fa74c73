"""Diagnostics plumbing: source spans, coded findings, and reports.

Diagnostic codes are stable strings; the full catalog lives in
docs/format.md. Renderers must not invent codes outside that catalog.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

__all__ = ["SourceSpan", "ParseDiagnostic", "ValidationReport", "Severity"]


# Severity tokens; kept as plain strings for cheap JSON round-trips.
ERROR = "error"
WARNING = "warning"
Severity = str


@dataclass(frozen=True, slots=True)
class SourceSpan:
    """1-based position of a token in an input file."""

    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True, slots=True)
class ParseDiagnostic:
    severity: Severity
    code: str
    message: str
    span: SourceSpan

    def render(self) -> str:
        """Line format: ``severity code file:line:col message``."""
        return f"{self.severity} {self.code} {self.span} {self.message}"

    def to_dict(self) -> dict[str, object]:
        return {
            "severity": self.severity,
            "code": self.code,
            "message": self.message,
            "file": self.span.file,
            "line": self.span.line,
            "column": self.span.column,
        }


@dataclass(frozen=True)
class ValidationReport:
    """Ordered diagnostics; ``ok`` holds iff no error-severity entry."""

    diagnostics: tuple[ParseDiagnostic, ...] = ()

    @property
    def ok(self) -> bool:
        return not any(d.severity == ERROR for d in self.diagnostics)

    @property
    def errors(self) -> tuple[ParseDiagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity == ERROR)

    @property
    def warnings(self) -> tuple[ParseDiagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity == WARNING)

    def render_lines(self) -> list[str]:
        return [d.render() for d in self.diagnostics]

    def to_json(self) -> str:
        return json.dumps([d.to_dict() for d in self.diagnostics], indent=2) + "\n"


class ReportCollector:
    """Mutable accumulator used while parsing/validating."""

    def __init__(self) -> None:
        self._diagnostics: list[ParseDiagnostic] = []

    def error(self, code: str, message: str, span: SourceSpan) -> None:
        self._diagnostics.append(ParseDiagnostic(ERROR, code, message, span))

    def warning(self, code: str, message: str, span: SourceSpan) -> None:
        self._diagnostics.append(ParseDiagnostic(WARNING, code, message, span))

    @property
    def has_errors(self) -> bool:
        return any(d.severity == ERROR for d in self._diagnostics)

    def report(self) -> ValidationReport:
        return ValidationReport(tuple(self._diagnostics))
