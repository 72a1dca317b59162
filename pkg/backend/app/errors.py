"""Error hierarchy shared by the library and the command line.

Every error carries a stable ``code`` (part of the JSON error payload) and the
process exit status the CLI maps it to: 1 for mathematical failures, 2 for
usage / parse / precondition problems.
"""

from __future__ import annotations

from typing import Any


class CollapseError(ValueError):
    code = "collapse_error"
    exit_code = 2

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def payload(self) -> dict[str, Any]:
        return {"error": {"code": self.code, "message": self.message}}


class PotentialSyntaxError(CollapseError):
    code = "syntax_error"

    def __init__(self, message: str, *, position: int, expected: str):
        super().__init__(f"{message} at position {position} (expected {expected})")
        self.position = position
        self.expected = expected


class UnknownIdentifier(CollapseError):
    code = "unknown_identifier"

    def __init__(self, name: str, *, position: int):
        super().__init__(f"unknown identifier {name!r} at position {position}")
        self.name = name
        self.position = position


class DomainError(CollapseError):
    code = "domain_error"


class EvaluationOverflow(CollapseError, OverflowError):
    code = "overflow"
    exit_code = 1


class NotPositive(CollapseError):
    code = "not_positive"
    exit_code = 1

    def __init__(self, quantity: str, value: float, *, R: float):
        super().__init__(f"{quantity} = {value:.6g} <= 0 at R = {R:.6g}: metric degenerate at this radius")
        self.quantity = quantity
        self.value = value
        self.R = R


class InvalidPotential(CollapseError):
    code = "invalid_potential"
    exit_code = 1


class InvalidInitialRadius(CollapseError):
    code = "invalid_initial_radius"


class StallDetected(CollapseError):
    code = "stall_detected"
    exit_code = 1

    def __init__(self, message: str, *, R: float):
        super().__init__(message)
        self.R = R


class NotCollapsed(CollapseError):
    code = "not_collapsed"
    exit_code = 1


class OutOfRange(CollapseError):
    code = "out_of_range"


class StepBudgetExceeded(CollapseError):
    code = "max_steps_exceeded"
    exit_code = 1


class InternalError(CollapseError):
    code = "internal_error"
    exit_code = 1
