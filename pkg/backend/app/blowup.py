"""Kähler validity of f = log S + g(S) on C^m minus the origin and across the
exceptional divisor of the blow-up at the origin.

The scalar conditions are dimension independent. The chart matrices are the
m = 2 computation on the charts U1, U2 of the blow-up, where the pulled-back
potential is written in the chart coordinates (z1, z2):

    U1: S = |z1|^2 (1 + |z2|^2)    (exceptional divisor E = {z1 = 0})
    U2: S = |z2|^2 (1 + |z1|^2)    (E = {z2 = 0})

Matrix entries are a_ij = d^2 phi / (d conj(z_i) d z_j), so a12 carries
z1 * conj(z2).
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .expression import PotentialExpr
from .potential import eval_g_jet, eval_plain
from .settings import settings

logger = logging.getLogger(__name__)

# Smallest grid point relative to S_max for the open conditions.
_GRID_SPAN = 1e-10


class Chart(str, enum.Enum):
    U1 = "U1"
    U2 = "U2"


class FubiniStudyConvention(str, enum.Enum):
    """Coefficient used for the E-tangential (Fubini-Study) block.

    PRINTED: 1/(1+|w|^2), the block as usually written in the chart
    matrices of the extension criterion. EXACT: 1/(1+|w|^2)^2, the coefficient of
    ddbar log(1+|w|^2), i.e. the true complex Hessian. The two differ by the
    positive factor (1+|w|^2) and give identical definiteness verdicts.
    """

    PRINTED = "printed"
    EXACT = "exact"


@dataclass(frozen=True)
class ValidityReport:
    g_S_at_0: float
    cond_extension: bool
    cond_positive_1: bool
    cond_positive_2: bool
    first_violation_S: float | None
    samples: int
    S_max: float

    @property
    def kahler_punctured(self) -> bool:
        """Metric on C^m minus the origin (the two open conditions)."""
        return self.cond_positive_1 and self.cond_positive_2

    @property
    def extends(self) -> bool:
        return self.cond_extension and self.kahler_punctured

    @property
    def failed_conditions(self) -> list[str]:
        failed = []
        if not self.cond_extension:
            failed.append("extension")
        if not self.cond_positive_1:
            failed.append("positive_1")
        if not self.cond_positive_2:
            failed.append("positive_2")
        return failed

    def to_dict(self) -> dict:
        return {
            "g_S_at_0": self.g_S_at_0,
            "cond_extension": self.cond_extension,
            "cond_positive_1": self.cond_positive_1,
            "cond_positive_2": self.cond_positive_2,
            "first_violation_S": self.first_violation_S,
            "samples": self.samples,
            "S_max": self.S_max,
            "valid": self.extends,
        }


def check_validity(expr: PotentialExpr, S_max: float | None = None, samples: int | None = None) -> ValidityReport:
    """Check g_S(0) > 0 exactly and 1/S + g_S > 0, g_S + S g_SS > 0 on a geometric grid.

    A report with all conditions true certifies validity on the sampled grid only.
    """
    S_max = float(S_max if S_max is not None else settings.validity_s_max)
    samples = int(samples if samples is not None else settings.validity_samples)
    if samples < 2:
        raise DomainError("samples must be >= 2")
    if S_max <= 0:
        raise DomainError("S_max must be positive")

    g_S_at_0 = float(eval_g_jet(expr, 0.0).v1)
    grid = np.geomspace(S_max * _GRID_SPAN, S_max, samples)
    g = eval_g_jet(expr, grid)
    positive_1 = 1.0 / grid + g.v1 > 0
    positive_2 = g.v1 + grid * g.v2 > 0
    violations = ~(positive_1 & positive_2)
    first_violation = float(grid[np.argmax(violations)]) if violations.any() else None

    report = ValidityReport(
        g_S_at_0=g_S_at_0,
        cond_extension=g_S_at_0 > 0,
        cond_positive_1=bool(positive_1.all()),
        cond_positive_2=bool(positive_2.all()),
        first_violation_S=first_violation,
        samples=samples,
        S_max=S_max,
    )
    logger.debug(
        "Validity checked",
        extra={"potential": expr.text, "failed": report.failed_conditions, "first_violation_S": first_violation},
    )
    return report


def kahler_on_punctured_space(report: ValidityReport) -> bool:
    """True when f defines a metric on C^m minus the origin, whether or not it extends across E."""
    return report.kahler_punctured


@dataclass(frozen=True)
class HermitianMatrix2:
    a11: float
    a22: float
    a12: complex

    @property
    def a21(self) -> complex:
        return self.a12.conjugate()

    @property
    def determinant(self) -> float:
        return self.a11 * self.a22 - abs(self.a12) ** 2

    def is_positive_definite(self) -> bool:
        return self.a11 > 0 and self.determinant > 0

    def to_array(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a21, self.a22]], dtype=complex)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.to_array())


@dataclass(frozen=True)
class ChartPoint:
    chart: Chart
    z_fiber: complex
    z_base: complex

    @property
    def coordinates(self) -> tuple[complex, complex]:
        """(z1, z2) in the chart's own coordinate order."""
        if self.chart == Chart.U1:
            return complex(self.z_fiber), complex(self.z_base)
        return complex(self.z_base), complex(self.z_fiber)

    @property
    def S(self) -> float:
        return abs(self.z_fiber) ** 2 * (1.0 + abs(self.z_base) ** 2)

    @classmethod
    def covering(cls, Z1: complex, Z2: complex) -> tuple["ChartPoint", "ChartPoint"]:
        """Chart points on U1 and U2 of the point (Z1, Z2) of C^2 with Z1, Z2 != 0."""
        if Z1 == 0 or Z2 == 0:
            raise DomainError("point is not covered by both charts")
        return cls(Chart.U1, Z1, Z2 / Z1), cls(Chart.U2, Z2, Z1 / Z2)


def fubini_study_check(z_base: complex) -> float:
    """Coefficient 1/(1+|w|^2)^2 of ddbar log(1+|w|^2) in the divisor coordinate w."""
    return 1.0 / (1.0 + abs(z_base) ** 2) ** 2


def _fs_block(z_base: complex, convention: FubiniStudyConvention) -> float:
    if convention == FubiniStudyConvention.EXACT:
        return fubini_study_check(z_base)
    return 1.0 / (1.0 + abs(z_base) ** 2)


def pullback_matrix_closed(
    expr: PotentialExpr,
    p: ChartPoint,
    convention: FubiniStudyConvention = FubiniStudyConvention.PRINTED,
) -> HermitianMatrix2:
    """Pull-back of ddbar(log S + g) to the chart, for m = 2.

    On the divisor (z_fiber = 0) only g-jets at S = 0 enter and the matrix
    reduces to diag((1+|w|^2) g_S(0), FS) on U1 (roles swapped on U2).
    """
    g = eval_g_jet(expr, p.S)
    g_S, g_SS = float(g.v1), float(g.v2)
    S = p.S
    normal = g_S + S * g_SS
    fiber2 = abs(p.z_fiber) ** 2
    base2 = abs(p.z_base) ** 2
    z1, z2 = p.coordinates

    transverse = (1.0 + base2) * normal
    tangential = fiber2 * (g_S + fiber2 * base2 * g_SS) + _fs_block(p.z_base, convention)
    a12 = z1 * z2.conjugate() * normal
    if p.chart == Chart.U1:
        return HermitianMatrix2(a11=transverse, a22=tangential, a12=a12)
    return HermitianMatrix2(a11=tangential, a22=transverse, a12=a12)


def pullback_restriction(
    expr: PotentialExpr,
    z_base: complex,
    chart: Chart = Chart.U1,
    convention: FubiniStudyConvention = FubiniStudyConvention.PRINTED,
) -> HermitianMatrix2:
    return pullback_matrix_closed(expr, ChartPoint(chart, 0j, z_base), convention)


def _snap_step(h: float) -> float:
    # Power-of-two offsets keep x +/- h exact for |x| of order one.
    return 2.0 ** round(math.log2(h))


def pullback_matrix_numeric(expr: PotentialExpr, p: ChartPoint, h: float = 1e-3) -> HermitianMatrix2:
    """Central-difference complex Hessian of phi = log S + g(S) in chart coordinates.

    Stencils at h and h/2 are combined by Richardson extrapolation, which
    cancels the h^2 error term.

    Diagonal entries use 4 d^2/dz dzbar = d^2/dx^2 + d^2/dy^2; the off-diagonal
    entry d^2/dzbar1 dz2 = (phi_x1x2 + phi_y1y2 + i(phi_y1x2 - phi_x1y2)) / 4.
    """
    if p.z_fiber == 0:
        raise DomainError("potential is singular on the exceptional divisor (z_fiber = 0)")
    if h <= 0:
        raise ValueError("h must be positive")
    h = _snap_step(h)
    z1, z2 = p.coordinates
    x0 = np.array([z1.real, z1.imag, z2.real, z2.imag])
    fiber_index = 0 if p.chart == Chart.U1 else 2
    if np.hypot(x0[fiber_index], x0[fiber_index + 1]) <= 2 * h:
        raise DomainError("stencil reaches the exceptional divisor; decrease h")

    def phi(x: np.ndarray) -> float:
        a = complex(x[0], x[1])
        b = complex(x[2], x[3])
        if p.chart == Chart.U1:
            S = abs(a) ** 2 * (1.0 + abs(b) ** 2)
        else:
            S = abs(b) ** 2 * (1.0 + abs(a) ** 2)
        return math.log(S) + float(eval_plain(expr, S))

    hess = (4.0 * _real_hessian(phi, x0, 0.5 * h) - _real_hessian(phi, x0, h)) / 3.0
    a11 = 0.25 * (hess[0, 0] + hess[1, 1])
    a22 = 0.25 * (hess[2, 2] + hess[3, 3])
    a12 = 0.25 * complex(hess[0, 2] + hess[1, 3], hess[1, 2] - hess[0, 3])
    return HermitianMatrix2(a11=a11, a22=a22, a12=a12)


def _real_hessian(f, x0: np.ndarray, h: float) -> np.ndarray:
    dim = len(x0)
    f0 = f(x0)
    hess = np.zeros((dim, dim))
    E = h * np.eye(dim)
    for i in range(dim):
        for j in range(i, dim):
            if i == j:
                value = (f(x0 + E[i]) - 2.0 * f0 + f(x0 - E[i])) / (h * h)
            else:
                value = (
                    f(x0 + E[i] + E[j]) - f(x0 + E[i] - E[j]) - f(x0 - E[i] + E[j]) + f(x0 - E[i] - E[j])
                ) / (4.0 * h * h)
            hess[i, j] = hess[j, i] = value
    return hess
