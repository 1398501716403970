"""Exception hierarchy shared across the package."""

from __future__ import annotations


class HpCauseError(Exception):
    """Base class for every error raised by hpcause."""


class MissingVariableError(HpCauseError, LookupError):
    """An assignment does not cover a variable the formula needs."""

    def __init__(self, name: str):
        super().__init__(f"assignment has no value for variable {name!r}")
        self.name = name


class InvalidModelError(HpCauseError):
    def __init__(self, message: str, findings=()):
        super().__init__(message)
        self.findings = tuple(findings)


class ContextError(HpCauseError):
    """Context is not a total assignment of the exogenous variables."""


class InterventionError(HpCauseError):
    """Intervention targets an unknown or exogenous variable."""


class InvalidQueryError(HpCauseError):
    pass


class DslSyntaxError(HpCauseError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class BudgetExceeded(HpCauseError):
    """Brute-force enumeration would inspect more subsets than allowed."""


class CheckTimeout(HpCauseError):
    """A check ran past its deadline."""


class PreconditionError(HpCauseError):
    pass
