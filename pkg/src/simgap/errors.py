"""Exception hierarchy and validation findings shared across the toolkit."""

from __future__ import annotations

from dataclasses import dataclass


class SimGapError(Exception):
    """Base class for all toolkit errors."""


class AlignmentError(SimGapError):
    """Series cannot be compared: mismatched rates, grids or lengths."""


class DegenerateInputError(SimGapError):
    """Input too small or empty for the requested operation."""


class FormatError(SimGapError):
    """Malformed file content. Carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(SimGapError):
    """A submission bundle violates the benchmark contract."""


class LengthMismatchWarning(UserWarning):
    """Paired recordings differ in length by more than the warning threshold."""


SEVERITIES = ("error", "warning")


@dataclass(frozen=True)
class Finding:
    """One validation observation tied to a location (file or file:line)."""

    severity: str
    location: str
    message: str

    def __post_init__(self):
        if self.severity not in SEVERITIES:
            raise ValueError(f"unknown severity {self.severity!r}")

    def __str__(self) -> str:
        return f"{self.severity}: {self.location}: {self.message}"
