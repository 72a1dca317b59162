"""Order-3 jets: a value together with its first three derivatives.

Components may be Python floats or numpy arrays of a common shape, in which
case every operation acts elementwise (used to evaluate a potential on a whole
radius grid at once). Composition with an elementary function uses the
Faà di Bruno expansion truncated at third order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError

Scalar = Union[float, np.ndarray]


@dataclass(frozen=True)
class Jet3:
    v0: Scalar
    v1: Scalar = 0.0
    v2: Scalar = 0.0
    v3: Scalar = 0.0

    @classmethod
    def constant(cls, value: Scalar) -> "Jet3":
        return cls(value, 0.0, 0.0, 0.0)

    @classmethod
    def variable(cls, value: Scalar) -> "Jet3":
        return cls(value, np.ones_like(value, dtype=float) if np.ndim(value) else 1.0, 0.0, 0.0)

    def as_tuple(self) -> tuple[Scalar, Scalar, Scalar, Scalar]:
        return (self.v0, self.v1, self.v2, self.v3)

    def is_finite(self) -> bool:
        return all(bool(np.all(np.isfinite(c))) for c in self.as_tuple())

    def is_constant(self) -> bool:
        return all(bool(np.all(c == 0)) for c in (self.v1, self.v2, self.v3))

    def compose(self, d0: Scalar, d1: Scalar, d2: Scalar, d3: Scalar) -> "Jet3":
        """Jet of phi(self) given phi and its first three derivatives at ``self.v0``."""
        f1, f2, f3 = self.v1, self.v2, self.v3
        return Jet3(
            d0,
            d1 * f1,
            d2 * f1 * f1 + d1 * f2,
            d3 * f1 * f1 * f1 + 3.0 * d2 * f1 * f2 + d1 * f3,
        )

    def __add__(self, other: "Jet3 | float") -> "Jet3":
        other = _lift(other)
        return Jet3(self.v0 + other.v0, self.v1 + other.v1, self.v2 + other.v2, self.v3 + other.v3)

    __radd__ = __add__

    def __neg__(self) -> "Jet3":
        return Jet3(-self.v0, -self.v1, -self.v2, -self.v3)

    def __sub__(self, other: "Jet3 | float") -> "Jet3":
        return self + (-_lift(other))

    def __rsub__(self, other: float) -> "Jet3":
        return _lift(other) - self

    def __mul__(self, other: "Jet3 | float") -> "Jet3":
        o = _lift(other)
        return Jet3(
            self.v0 * o.v0,
            self.v1 * o.v0 + self.v0 * o.v1,
            self.v2 * o.v0 + 2.0 * self.v1 * o.v1 + self.v0 * o.v2,
            self.v3 * o.v0 + 3.0 * self.v2 * o.v1 + 3.0 * self.v1 * o.v2 + self.v0 * o.v3,
        )

    __rmul__ = __mul__

    def __truediv__(self, other: "Jet3 | float") -> "Jet3":
        return self * reciprocal(_lift(other))

    def __rtruediv__(self, other: float) -> "Jet3":
        return _lift(other) * reciprocal(self)

    def __pow__(self, other: "Jet3 | float") -> "Jet3":
        return power(self, _lift(other))


def _lift(value: "Jet3 | float") -> Jet3:
    return value if isinstance(value, Jet3) else Jet3.constant(float(value))


def reciprocal(x: Jet3) -> Jet3:
    a = x.v0
    if np.any(a == 0):
        raise DomainError("division by zero")
    inv = 1.0 / a
    return x.compose(inv, -inv * inv, 2.0 * inv**3, -6.0 * inv**4)


def exp(x: Jet3) -> Jet3:
    e = np.exp(x.v0)
    return x.compose(e, e, e, e)


def log(x: Jet3) -> Jet3:
    a = x.v0
    if np.any(a <= 0):
        raise DomainError("log of a nonpositive argument")
    inv = 1.0 / a
    return x.compose(np.log(a), inv, -inv * inv, 2.0 * inv**3)


def sqrt(x: Jet3) -> Jet3:
    a = x.v0
    if np.any(a < 0):
        raise DomainError("sqrt of a negative argument")
    if np.any(a == 0) and not x.is_constant():
        raise DomainError("sqrt is not differentiable at 0")
    r = np.sqrt(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        d1 = np.where(a > 0, 0.5 / r, 0.0)
        d2 = np.where(a > 0, -0.25 / (a * r), 0.0)
        d3 = np.where(a > 0, 0.375 / (a * a * r), 0.0)
    return x.compose(r, _scalar(d1), _scalar(d2), _scalar(d3))


def sin(x: Jet3) -> Jet3:
    s, c = np.sin(x.v0), np.cos(x.v0)
    return x.compose(s, c, -s, -c)


def cos(x: Jet3) -> Jet3:
    s, c = np.sin(x.v0), np.cos(x.v0)
    return x.compose(c, -s, -c, s)


def _scalar(value: Scalar) -> Scalar:
    return float(value) if np.ndim(value) == 0 else value


def _power_derivatives(a: Scalar, p: float) -> tuple[Scalar, Scalar, Scalar, Scalar]:
    """Derivatives of x**p at ``a`` for a constant exponent ``p``.

    Terms whose falling-factorial coefficient vanishes (integer p) are exactly
    zero, so S**2 has a finite third derivative at S = 0.
    """
    integral = float(p).is_integer()
    if not integral and np.any(a < 0):
        raise DomainError("real exponent of a negative base")
    coefficients = (1.0, p, p * (p - 1.0), p * (p - 1.0) * (p - 2.0))
    out = []
    for k, coef in enumerate(coefficients):
        if coef == 0.0:
            out.append(np.zeros_like(a, dtype=float) if np.ndim(a) else 0.0)
            continue
        if p - k < 0 and np.any(a == 0):
            raise DomainError("negative power of zero")
        out.append(coef * np.power(a, p - k))
    return out[0], out[1], out[2], out[3]


def power(base: Jet3, exponent: Jet3) -> Jet3:
    if exponent.is_constant() and np.ndim(exponent.v0) == 0:
        return base.compose(*_power_derivatives(base.v0, float(exponent.v0)))
    if np.any(base.v0 <= 0):
        raise DomainError("variable exponent of a nonpositive base")
    return exp(exponent * log(base))


FUNCTIONS = {
    "exp": exp,
    "log": log,
    "sqrt": sqrt,
    "sin": sin,
    "cos": cos,
}
