"""Dormand-Prince 5(4) embedded pair for scalar ODEs y' = f(t, y).

The fifth-order solution is propagated (local extrapolation) and the
difference to the embedded fourth-order solution drives the step size. The
last stage is evaluated at the new point, so it is reused as the first stage
of the next step (FSAL).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import EvaluationOverflow, StepBudgetExceeded

RHS = Callable[[float, float], float]

C = (0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0)
A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0),
)
B5 = (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0)
B4 = (5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0)
E = tuple(b5 - b4 for b5, b4 in zip(B5, B4))

ORDER = 5


@dataclass(frozen=True)
class Step:
    t: float
    y: float
    f: float
    h: float
    error_ratio: float

    @property
    def accepted(self) -> bool:
        return self.error_ratio <= 1.0


@dataclass
class DormandPrince54:
    rhs: RHS
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    safety: float = 0.9
    min_factor: float = 0.2
    max_factor: float = 5.0

    def __post_init__(self) -> None:
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        self.evaluations = 0

    def f(self, t: float, y: float) -> float:
        self.evaluations += 1
        value = float(self.rhs(t, y))
        if not math.isfinite(value):
            raise EvaluationOverflow(f"non-finite right-hand side at t = {t}, y = {y}")
        return value

    def attempt(self, t: float, y: float, f0: float, h: float) -> Step:
        """One trial step of size ``h`` from (t, y) with f0 = f(t, y)."""
        k = [f0]
        for i in range(1, 7):
            increment = sum(a * kj for a, kj in zip(A[i], k))
            k.append(self.f(t + C[i] * h, y + h * increment))
        y_new = y + h * sum(b * kj for b, kj in zip(B5, k))
        error = h * sum(e * kj for e, kj in zip(E, k))
        scale = self.abs_tol + self.rel_tol * max(abs(y), abs(y_new))
        return Step(t=t + h, y=y_new, f=k[6], h=h, error_ratio=abs(error) / scale)

    def resize(self, h: float, error_ratio: float) -> float:
        if error_ratio == 0.0:
            return h * self.max_factor
        factor = self.safety * error_ratio ** (-1.0 / ORDER)
        return h * min(self.max_factor, max(self.min_factor, factor))

    def initial_step(self, t: float, y: float, f0: float, direction: float = 1.0) -> float:
        """Starting step from the scale of y and its first two derivatives."""
        scale = self.abs_tol + self.rel_tol * abs(y)
        d0 = abs(y) / scale
        d1 = abs(f0) / scale
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        f1 = self.f(t + direction * h0, y + direction * h0 * f0)
        d2 = abs(f1 - f0) / scale / h0
        if max(d1, d2) <= 1e-15:
            h1 = max(1e-6, h0 * 1e-3)
        else:
            h1 = (0.01 / max(d1, d2)) ** (1.0 / ORDER)
        return min(100.0 * h0, h1)


def hermite(t0: float, y0: float, f0: float, t1: float, y1: float, f1: float, t: float) -> float:
    """Cubic Hermite interpolant of an accepted step, evaluated at t in [t0, t1]."""
    h = t1 - t0
    if h == 0:
        return y1
    s = (t - t0) / h
    h00 = (1.0 + 2.0 * s) * (1.0 - s) ** 2
    h10 = s * (1.0 - s) ** 2
    h01 = s * s * (3.0 - 2.0 * s)
    h11 = s * s * (s - 1.0)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def integrate_to(
    stepper: DormandPrince54,
    t0: float,
    y0: float,
    t_end: float,
    max_steps: int,
) -> tuple[float, int]:
    """Integrate from (t0, y0) to exactly t_end; returns (y(t_end), accepted steps)."""
    if t_end == t0:
        return y0, 0
    direction = 1.0 if t_end > t0 else -1.0
    t, y = t0, y0
    f0 = stepper.f(t, y)
    h = stepper.initial_step(t, y, f0, direction)
    accepted = 0
    for _ in range(max_steps):
        h = min(h, abs(t_end - t))
        step = stepper.attempt(t, y, f0, direction * h)
        if not step.accepted:
            h = stepper.resize(h, step.error_ratio)
            continue
        accepted += 1
        last = abs(t_end - step.t) <= 4.0 * math.ulp(abs(t_end)) or h == abs(t_end - t)
        t, y, f0 = step.t, step.y, step.f
        if last:
            return y, accepted
        h = stepper.resize(h, step.error_ratio)
    raise StepBudgetExceeded(f"step budget of {max_steps} exhausted before t = {t_end}")
