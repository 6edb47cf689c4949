"""Exception hierarchy for the noise-budget engine.

The CLI maps these onto exit statuses: validation problems (bad parameters,
bad config) exit 2, numerical problems (singular closed-loop matrix,
degenerate sensor coupling) exit 3.
"""

from __future__ import annotations


class DragfreeError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(DragfreeError, ValueError):
    """An argument lies outside the mathematical domain (e.g. omega = 0)."""


class RangeError(DomainError):
    """A lookup fell outside the range of a tabulated model."""


class ValidationError(DragfreeError, ValueError):
    """A parameter or input violates an invariant (negative mass, non-passive table, ...)."""


class ConfigError(ValidationError):
    """A configuration document is malformed or invalid.

    Carries the dotted key path and, when known, the source line so the
    message pinpoints the offending entry.
    """

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None,
                 filename: str | None = None):
        self.path = path
        self.line = line
        self.filename = filename
        prefix = ""
        if filename is not None and line is not None:
            prefix = f"{filename}:{line}: "
        elif line is not None:
            prefix = f"line {line}: "
        elif filename is not None:
            prefix = f"{filename}: "
        full = f"{prefix}{path}: {message}" if path else f"{prefix}{message}"
        super().__init__(full)


class NumericalError(DragfreeError, ArithmeticError):
    """A computation cannot proceed for numerical/physical reasons."""


class SingularMatrixError(NumericalError):
    """The closed-loop matrix is singular (a physical pole of the coupled system)."""

    def __init__(self, message: str, *, omega: float | None = None):
        self.omega = omega
        if omega is not None:
            message = f"{message} at omega={omega!r} rad/s"
        super().__init__(message)


class DegenerateCouplingError(NumericalError):
    """The coupling impedance magnitude vanishes; the position sensor cannot operate."""

    def __init__(self, message: str = "coupling impedance magnitude is zero; "
                 "sensing-error spectrum diverges", *, omega: float | None = None):
        self.omega = omega
        if omega is not None:
            message = f"{message} (at omega={omega!r} rad/s)"
        super().__init__(message)
