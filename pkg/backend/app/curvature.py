"""Principal curvatures, mean curvature and |A|^2 of the U(m)-invariant
hyperspheres S = R^2 in C^m minus the origin.

With M = f_S + S f_SS and N = f_S + 3 S f_SS + S^2 f_SSS:

    lambda_tan  = -sqrt(M) / (f_S sqrt(S))        (multiplicity 2m-2)
    lambda_last = -N / (M^(3/2) sqrt(S))
    H    = -((2m-2) M^2 + f_S N) / ((2m-1) M^(3/2) sqrt(S) f_S)
    |A|^2 = ((2m-2) M^4 + f_S^2 N^2) / (f_S^2 M^3 S)

H is the average of the 2m-1 principal curvatures. All signs are those of
the inward collapse (every curvature is negative for the flat sphere).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np
import pandas as pd

from .errors import DomainError, NotPositive
from .potential import PotentialLike, RadialTerms, Scalar, as_kahler

CURVATURE_COLUMNS = ["R", "lambda_tan", "lambda_last", "H", "A_sq"]


@dataclass(frozen=True)
class FrameData:
    eta_sq: float
    mu_sq: float
    m: int
    S: float
    R: float


@dataclass(frozen=True)
class CurvatureSample:
    R: float
    lambda_tan: float
    lambda_last: float
    H: float
    A_sq: float

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


def check_dimension(m: int) -> None:
    if int(m) != m or m < 2:
        raise DomainError(f"complex dimension m must be an integer >= 2, got {m}")


def _positive_terms(potential: PotentialLike, S: Scalar, *, allow_zero: bool = False) -> RadialTerms:
    terms = as_kahler(potential).radial_terms(S)
    radius = np.sqrt(S)
    f_S = np.asarray(terms.f_S)
    inv_f_S = np.asarray(terms.inv_f_S)
    eta_bad = (f_S <= 0) | ~np.isfinite(inv_f_S) | (inv_f_S <= 0)
    if allow_zero:
        # 1/f_S vanishes at S = 0 for f = log S + g.
        eta_bad = eta_bad & (np.asarray(S) > 0)
    for name, value, bad in (("mu_sq", np.asarray(terms.M), np.asarray(terms.M) <= 0), ("eta_sq", f_S, eta_bad)):
        if np.any(bad):
            index = np.argmax(bad) if np.ndim(bad) else ()
            offending = float(np.broadcast_to(value, np.shape(bad))[index])
            at = float(np.asarray(radius)[index]) if np.ndim(radius) else float(radius)
            raise NotPositive(name, offending, R=at)
    return terms


def _radius_to_S(R: Scalar) -> Scalar:
    R = np.asarray(R, dtype=float) if np.ndim(R) else float(R)
    if np.any(R <= 0):
        raise DomainError("R must be positive")
    return R * R


def frame(potential: PotentialLike, m: int, R: float) -> FrameData:
    """Metric coefficients eta^2 = f_S (tangential) and mu^2 = f_S + S f_SS (Reeb / normal)."""
    check_dimension(m)
    S = _radius_to_S(R)
    terms = _positive_terms(potential, S)
    return FrameData(eta_sq=float(terms.f_S), mu_sq=float(terms.M), m=int(m), S=S, R=float(R))


def second_fundamental_form_diag(
    eta: float,
    mu: float,
    A: float,
    tau: float,
    dn_eta: float,
    dn_mu: float,
    d: int,
) -> tuple[float, float]:
    """Diagonal of the second fundamental form in a g0-orthonormal frame.

    For a hypersurface whose Euclidean second fundamental form is tau * g0 and
    whose ambient metric is diagonal (eta^2 on d-1 directions, mu^2 on the
    last tangent direction, A^2 on the normal). Returns (pi_tan, pi_last);
    the shape-operator eigenvalues are pi_tan / eta^2 and pi_last / mu^2.
    """
    if min(eta, mu, A) <= 0:
        raise DomainError("eta, mu and A must be positive")
    if d < 2:
        raise DomainError("hypersurface dimension d must be >= 2")
    pi_tan = eta * eta * tau / A + eta * dn_eta / A
    pi_last = mu * mu * tau / A + mu * dn_mu / A
    return pi_tan, pi_last


def principal_curvatures_from_frame(potential: PotentialLike, m: int, R: float) -> tuple[float, float]:
    """Principal curvatures rebuilt from the frame data and ``second_fundamental_form_diag``.

    Uses tau = 1/sqrt(S), eta^-1 dn eta = sqrt(S) f_SS / f_S and
    mu^-1 dn mu = sqrt(S) (2 f_SS + S f_SSS) / mu^2; the sign is fixed by the
    inward orientation of the collapse.
    """
    data = frame(potential, m, R)
    f = as_kahler(potential).f_jet(data.S)
    f_SS, f_SSS = float(f.v2), float(f.v3)
    eta = float(np.sqrt(data.eta_sq))
    mu = float(np.sqrt(data.mu_sq))
    root_S = data.R
    dn_eta = root_S * f_SS / data.eta_sq * eta
    dn_mu = root_S * (2.0 * f_SS + data.S * f_SSS) / data.mu_sq * mu
    pi_tan, pi_last = second_fundamental_form_diag(
        eta, mu, mu, 1.0 / root_S, dn_eta, dn_mu, 2 * data.m - 1
    )
    return -pi_tan / data.eta_sq, -pi_last / data.mu_sq


def principal_curvatures(potential: PotentialLike, m: int, R: Scalar) -> tuple[Scalar, Scalar]:
    """(lambda_tan, lambda_last); lambda_tan has multiplicity 2m-2."""
    check_dimension(m)
    S = _radius_to_S(R)
    t = _positive_terms(potential, S)
    root_S = np.sqrt(S)
    lambda_tan = -np.sqrt(t.M) * t.inv_f_S / root_S
    lambda_last = -t.N / (t.M ** 1.5 * root_S)
    return lambda_tan, lambda_last


def mean_curvature(potential: PotentialLike, m: int, R: Scalar) -> Scalar:
    check_dimension(m)
    S = _radius_to_S(R)
    t = _positive_terms(potential, S)
    # Numerator and denominator of the closed form divided by f_S.
    numerator = (2 * m - 2) * t.M ** 2 * t.inv_f_S + t.N
    return -numerator / ((2 * m - 1) * t.M ** 1.5 * np.sqrt(S))


def norm_A_squared(potential: PotentialLike, m: int, R: Scalar) -> Scalar:
    check_dimension(m)
    S = _radius_to_S(R)
    t = _positive_terms(potential, S)
    numerator = (2 * m - 2) * t.M ** 4 * t.inv_f_S ** 2 + t.N ** 2
    return numerator / (t.M ** 3 * S)


def scaled_mean_curvature(potential: PotentialLike, m: int, S: Scalar) -> Scalar:
    """R * H as a function of S; regular down to and including S = 0."""
    check_dimension(m)
    t = _positive_terms(potential, S, allow_zero=True)
    return -((2 * m - 2) * t.M ** 2 * t.inv_f_S + t.N) / ((2 * m - 1) * t.M ** 1.5)


def scaled_norm_A_squared(potential: PotentialLike, m: int, S: Scalar) -> Scalar:
    """R^2 * |A|^2 as a function of S; regular down to and including S = 0."""
    check_dimension(m)
    t = _positive_terms(potential, S, allow_zero=True)
    return ((2 * m - 2) * t.M ** 4 * t.inv_f_S ** 2 + t.N ** 2) / t.M ** 3


def curvature_sample(potential: PotentialLike, m: int, R: float) -> CurvatureSample:
    lambda_tan, lambda_last = principal_curvatures(potential, m, R)
    return CurvatureSample(
        R=float(R),
        lambda_tan=float(lambda_tan),
        lambda_last=float(lambda_last),
        H=float(mean_curvature(potential, m, R)),
        A_sq=float(norm_A_squared(potential, m, R)),
    )


def curvature_profile(potential: PotentialLike, m: int, radii: Iterable[float]) -> pd.DataFrame:
    R = np.asarray(list(radii), dtype=float)
    lambda_tan, lambda_last = principal_curvatures(potential, m, R)
    return pd.DataFrame(
        {
            "R": R,
            "lambda_tan": lambda_tan,
            "lambda_last": lambda_last,
            "H": mean_curvature(potential, m, R),
            "A_sq": norm_A_squared(potential, m, R),
        },
        columns=CURVATURE_COLUMNS,
    )
