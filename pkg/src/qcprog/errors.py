"""Exception hierarchy."""

from __future__ import annotations


class QcprogError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(QcprogError, ValueError):
    pass


class NotHermitian(QcprogError, ValueError):
    pass


class NotPositive(QcprogError, ValueError):
    pass


class EmptyAmbient(QcprogError, ValueError):
    pass


class NonPositiveScale(QcprogError, ValueError):
    pass


class InvalidState(QcprogError, ValueError):
    pass


class UnknownProcess(QcprogError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class NonConvergence(QcprogError, RuntimeError):
    """A fixpoint chain failed to stabilize within its proven bound."""


class SingularSystem(QcprogError, RuntimeError):
    pass


class TooManyProcesses(QcprogError):
    """The m! permutation machinery would exceed the configured guard."""


class BudgetExceeded(QcprogError):
    """A brute-force enumeration would exceed its budget."""


class ParseError(QcprogError, ValueError):
    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class ValidationError(QcprogError, ValueError):
    """Program failed validation; ``failures`` holds structured residuals."""

    def __init__(self, message: str, failures: list[dict] | None = None):
        self.failures = failures or []
        super().__init__(message)
