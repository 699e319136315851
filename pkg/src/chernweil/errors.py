"""Exception hierarchy shared across the package.

Errors are split by who is at fault: ``ConfigError`` and ``UsageError``
mean the caller handed us something malformed, the numerical errors mean
the data itself misbehaved (NaN where smoothness was promised, a zero
where none was declared, a degenerate pivot).
"""

from __future__ import annotations


class ChernWeilError(Exception):
    """Base class for all package errors."""


class ConfigError(ChernWeilError):
    """Malformed configuration text or unknown/invalid keys."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UsageError(ChernWeilError):
    """An operation was called with incompatible shapes, degrees or types."""


class NumericalSingularityError(ChernWeilError):
    """Non-finite samples showed up outside every declared singular region."""


class UndeclaredSingularityError(ChernWeilError):
    """A bundle map degenerates somewhere no singularity was declared."""


class DegeneracyError(ChernWeilError):
    """A pointwise inverse/eigensolve hit a numerically singular matrix."""


class SpinStructureError(ChernWeilError):
    """No consistent square root of the given line bundle degree exists."""


class AtomicityError(ChernWeilError):
    """A section was declared atomic but its diagnostic integrals diverge."""
