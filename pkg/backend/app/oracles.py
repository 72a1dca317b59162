"""Closed-form reference solutions: the Burns metric (g = S on the blow-up of C^2)
and the round sphere of the flat metric f = S.

Burns: R^2/2 + (1/3) log(3R^2 + 1) = T_sing - t.
Flat:  R(t) = sqrt(R0^2 - 2t), whatever m is (H is the average of 2m-1 equal curvatures -1/R).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from scipy.optimize import bisect

from .errors import DomainError, OutOfRange
from .expression import serialize
from .potential import PotentialLike, as_kahler

RADIUS_XTOL = 1e-13


class BurnsCurvatures(NamedTuple):
    lambda_tan: float
    lambda_last: float
    H: float
    A_sq: float


def _check_radius(R0: float) -> None:
    if not R0 > 0:
        raise DomainError(f"R0 must be positive, got {R0}")


def burns_implicit(R: float) -> float:
    """Left-hand side R^2/2 + (1/3) log(3R^2 + 1); strictly increasing in R >= 0."""
    S = R * R
    return 0.5 * S + math.log1p(3.0 * S) / 3.0


def burns_T_sing(R0: float) -> float:
    _check_radius(R0)
    return burns_implicit(R0)


def burns_radius(R0: float, t: float) -> float:
    """Radius at time t of the Burns flow started at R0, by bisection to 1e-12."""
    T = burns_T_sing(R0)
    if t < 0 or t > T:
        raise OutOfRange(f"t = {t} outside [0, T_sing = {T}]")
    if t == 0:
        return float(R0)
    if t == T:
        return 0.0
    target = T - t
    return float(bisect(lambda R: burns_implicit(R) - target, 0.0, R0, xtol=RADIUS_XTOL, maxiter=200))


def burns_curvatures(R: float) -> BurnsCurvatures:
    if not R > 0:
        raise DomainError(f"R must be positive, got {R}")
    S = R * R
    return BurnsCurvatures(
        lambda_tan=-R / (S + 1.0),
        lambda_last=-1.0 / R,
        H=-(3.0 * S + 1.0) / (3.0 * R * (S + 1.0)),
        A_sq=(2.0 * S * S + (S + 1.0) ** 2) / (S * (S + 1.0) ** 2),
    )


def flat_T_sing(R0: float) -> float:
    _check_radius(R0)
    return 0.5 * R0 * R0


def flat_radius(R0: float, t: float, m: int = 2) -> float:
    if m < 2:
        raise DomainError(f"complex dimension m must be >= 2, got {m}")
    T = flat_T_sing(R0)
    if t < 0 or t > T:
        raise OutOfRange(f"t = {t} outside [0, T_sing = {T}]")
    return math.sqrt(max(R0 * R0 - 2.0 * t, 0.0))


@dataclass(frozen=True)
class BurnsOracle:
    R0: float

    def __post_init__(self) -> None:
        _check_radius(self.R0)

    @property
    def T_sing(self) -> float:
        return burns_T_sing(self.R0)

    def radius(self, t: float) -> float:
        return burns_radius(self.R0, t)


def closed_form_T_sing(potential: PotentialLike, m: int, R0: float) -> float | None:
    """Singular time when the potential is one of the exactly solvable cases, else None."""
    kahler = as_kahler(potential)
    if serialize(kahler.expr) != "S":
        return None
    if kahler.direct:
        return flat_T_sing(R0)
    if m == 2:
        return burns_T_sing(R0)
    return None
