"""Exception hierarchy shared by every zomax module."""

from __future__ import annotations

from typing import Any


class ZomaxError(Exception):
    """Base class for all zomax failures."""


class DimensionMismatchError(ZomaxError, ValueError):
    pass


class ConfigurationError(ZomaxError, ValueError):
    pass


class MissingGradientError(ZomaxError):
    pass


class InfeasibleStartError(ZomaxError, ValueError):
    pass


class InfeasiblePlanError(ZomaxError, ValueError):
    """A step-size window or bound denominator is empty or nonpositive."""


class EvaluationError(ZomaxError):
    """The objective returned a non-finite value."""

    def __init__(self, message: str, point: Any = None) -> None:
        super().__init__(message)
        self.point = point
        self.partial_trace = None


class DivergenceError(ZomaxError):
    def __init__(self, message: str, iteration: int) -> None:
        super().__init__(message)
        self.iteration = iteration
        self.partial_trace = None


class ConfigFileError(ZomaxError):
    """Malformed experiment file; carries the line number or section.field when known."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None) -> None:
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(field)
        prefix = f"[{', '.join(location)}] " if location else ""
        super().__init__(f"{prefix}{message}")
        self.line = line
        self.field = field
