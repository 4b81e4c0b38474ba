"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class LonError(Exception):
    """Base class for every error raised by lonscape."""


class ValidationError(LonError, ValueError):
    pass


class DomainError(ValidationError):
    pass


class MissingMeasurementError(LonError, KeyError):
    def __init__(self, key: str):
        super().__init__(key)
        self.key = key

    def __str__(self) -> str:
        return f"no measurement for configuration {self.key!r}"


class MeasurementError(LonError):
    """An external measurement failed; ``command`` is the substituted command line."""

    def __init__(self, message: str, command: str):
        super().__init__(f"{message}: {command}")
        self.command = command


class MeasurementFailure(MeasurementError):
    pass


class MeasurementParseError(MeasurementError):
    pass


class MeasurementTimeout(MeasurementError):
    pass


class BudgetExhausted(LonError):
    def __init__(self, best, best_fitness: float):
        super().__init__("evaluation budget exhausted")
        self.best = best
        self.best_fitness = best_fitness


class PartialTraceError(LonError):
    def __init__(self, cause: BaseException, trace):
        super().__init__(f"sampling run aborted: {cause}")
        self.cause = cause
        self.trace = trace


class InconsistentTraceError(LonError):
    pass


class UndefinedMetricError(LonError, ValueError):
    pass


class InsufficientDataError(LonError):
    pass
