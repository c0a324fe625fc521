"""Exception hierarchy shared by every engine.

The CLI maps ``ConfigurationError`` and ``DomainError`` to exit code 2 and
``NumericError`` to exit code 3.
"""

from __future__ import annotations


class RSAError(Exception):
    """Base class for all package errors."""


class ConfigurationError(RSAError, ValueError):
    """Inputs that cannot describe a valid run (bad grid, bad weights, ...)."""


class DomainError(RSAError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ClassificationUnavailable(DomainError):
    """Tabulated distribution without a declared tail class."""


class NumericError(RSAError, ArithmeticError):
    """A numerical procedure failed at run time."""


class QuadratureError(NumericError):
    """Non-finite integrand value or failed truncation."""

    def __init__(self, message: str, location: float | None = None):
        super().__init__(message)
        self.location = location


class BracketError(NumericError):
    """Root finder called without a sign change."""


class SimulationError(NumericError):
    """Simulator failure, tagged with the replicate index when known."""

    def __init__(self, message: str, replicate: int | None = None):
        if replicate is not None:
            message = f"replicate {replicate}: {message}"
        super().__init__(message)
        self.replicate = replicate
