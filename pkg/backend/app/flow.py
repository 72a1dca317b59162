"""Mean curvature flow of the hyperspheres S = R^2: dR/dt = H(R).

The integrated variable is u = R^2, for which du/dt = 2 R H is bounded and
tends to -2c at the exceptional divisor (R H -> -c). Each step is capped so
that it removes at most ``step_shrink_limit`` of u, so the tail of a
collapsing trajectory is sampled geometrically down to ``r_stop``, or
until steps drop below the resolution of t.
"""

from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import pandas as pd
from scipy.integrate import quad
from scipy.optimize import brentq

from .curvature import check_dimension, norm_A_squared, scaled_mean_curvature, scaled_norm_A_squared
from .errors import (
    CollapseError,
    DomainError,
    InternalError,
    InvalidInitialRadius,
    InvalidPotential,
    NotCollapsed,
    StallDetected,
)
from .expression import parse_potential, serialize
from .integrator import DormandPrince54, hermite, integrate_to
from .oracles import closed_form_T_sing
from .potential import KahlerPotential, PotentialLike, as_kahler, eval_g_jet
from .settings import settings

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ["t", "R", "H", "A_sq"]
SWEEP_COLUMNS = ["R0", "T_sing", "T_sing_quadrature", "limit_estimate", "verdict", "error"]

# Lower end of the monotonicity probe, relative to the probed maximum.
_PROBE_SPAN = 1e-6
# Smallest step, in units of ulp(t), that still advances the time grid.
_TIME_RESOLUTION_ULPS = 16
# Checkpoint root tolerance relative to the step length.
_EVENT_XTOL = 1e-12


class FlowStatus(str, enum.Enum):
    COLLAPSED = "Collapsed"
    STALLED = "Stalled"
    MAX_STEPS_EXCEEDED = "MaxStepsExceeded"


class Verdict(str, enum.Enum):
    TYPE_I = "TypeI"
    TYPE_II = "TypeII"
    INCONCLUSIVE = "Inconclusive"


def _from_settings(name: str):
    return field(default_factory=lambda: getattr(settings, name))


@dataclass(frozen=True)
class FlowOptions:
    r_stop: float = _from_settings("flow_r_stop")
    rel_tol: float = _from_settings("flow_rel_tol")
    abs_tol: float = _from_settings("flow_abs_tol")
    max_steps: int = _from_settings("flow_max_steps")
    output_stride: float | None = _from_settings("flow_output_stride")
    tail_levels_per_decade: int = _from_settings("flow_tail_levels_per_decade")
    step_shrink_limit: float = _from_settings("flow_step_shrink_limit")
    stall_threshold: float = _from_settings("stall_threshold")

    def __post_init__(self) -> None:
        for name in ("r_stop", "rel_tol", "abs_tol", "stall_threshold"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.max_steps < 1 or self.tail_levels_per_decade < 1:
            raise DomainError("max_steps and tail_levels_per_decade must be >= 1")
        if self.output_stride is not None and not self.output_stride > 0:
            raise DomainError("output_stride must be positive")
        if not 0 < self.step_shrink_limit < 1:
            raise DomainError("step_shrink_limit must lie in (0, 1)")


class FlowSample(NamedTuple):
    t: float
    R: float
    H: float
    A_sq: float


@dataclass(frozen=True)
class Trajectory:
    samples: tuple[FlowSample, ...]
    status: FlowStatus
    t_end: float
    T_sing_trajectory: float | None
    R0: float
    m: int
    steps: int = 0
    rejected: int = 0

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def radii(self) -> np.ndarray:
        return np.array([s.R for s in self.samples])

    @property
    def final(self) -> FlowSample:
        return self.samples[-1]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.samples, columns=TRAJECTORY_COLUMNS)


class AsymptoticConstants(NamedTuple):
    c: float
    W0: float
    limit_predicted: float


@dataclass(frozen=True)
class SingularityReport:
    potential: str
    m: int
    R0: float
    T_sing_trajectory: float
    T_sing_quadrature: float
    T_sing_closed_form: float | None
    type_verdict: Verdict
    limit_estimate: float
    limit_predicted: float
    c_constant: float
    max_product: float

    def to_dict(self) -> dict:
        T_sing = {"trajectory": self.T_sing_trajectory, "quadrature": self.T_sing_quadrature}
        if self.T_sing_closed_form is not None:
            T_sing["closed_form"] = self.T_sing_closed_form
        return {
            "potential": self.potential,
            "m": self.m,
            "R0": self.R0,
            "T_sing": T_sing,
            "verdict": self.type_verdict.value,
            "limit": {"estimate": self.limit_estimate, "predicted": self.limit_predicted},
            "c": self.c_constant,
        }

    def to_frame(self) -> pd.DataFrame:
        """One-row table with the nested keys joined by underscores."""
        return pd.json_normalize(self.to_dict(), sep="_")

    def summary(self) -> str:
        verdict = {Verdict.TYPE_I: "Type I", Verdict.TYPE_II: "Type II"}.get(self.type_verdict, "Inconclusive")
        return f"T_sing ≈ {self.T_sing_trajectory:.6f}, {verdict}, limit ≈ {self.limit_estimate:.3f}"


def describe(potential: PotentialLike) -> str:
    kahler = as_kahler(potential)
    if kahler.direct:
        return kahler.label
    return kahler.expr.text or str(kahler.expr)


def _scaled_H(kahler: KahlerPotential, m: int, u: float) -> float:
    return float(scaled_mean_curvature(kahler, m, max(u, 0.0)))


def _sample(kahler: KahlerPotential, m: int, t: float, u: float, R: float | None = None) -> FlowSample:
    R = math.sqrt(u) if R is None else R
    return FlowSample(
        t=t,
        R=R,
        H=_scaled_H(kahler, m, u) / R,
        A_sq=float(scaled_norm_A_squared(kahler, m, u)) / u,
    )


def monotone_radius(
    potential: PotentialLike,
    m: int,
    R_probe_max: float | None = None,
    samples: int | None = None,
) -> float:
    """Largest R* <= R_probe_max with H < 0 on (0, R*]; ``math.inf`` when H < 0 on the whole probe.

    This is a sampled probe, not a proof: sign changes between grid points are missed.
    """
    check_dimension(m)
    kahler = as_kahler(potential)
    R_max = float(R_probe_max if R_probe_max is not None else settings.monotone_probe_r_max)
    n = int(samples if samples is not None else settings.monotone_probe_samples)
    if not R_max > 0 or n < 2:
        raise DomainError("R_probe_max must be positive and samples >= 2")

    if _scaled_H(kahler, m, 0.0) >= 0:
        raise InvalidPotential("mean curvature is not negative near the exceptional divisor")
    radii = np.geomspace(R_max * _PROBE_SPAN, R_max, n)
    rh = scaled_mean_curvature(kahler, m, radii * radii)
    bad = rh >= 0
    if not bad.any():
        return math.inf
    i = int(np.argmax(bad))
    lo = float(radii[i - 1]) if i > 0 else 0.0
    hi = float(radii[i])
    R_star = float(brentq(lambda R: _scaled_H(kahler, m, R * R), lo, hi, xtol=1e-14))
    logger.info("Mean curvature changes sign", extra={"potential": describe(kahler), "m": m, "R_star": R_star})
    return R_star


class _Levels:
    """Geometric radius checkpoints R0 * 10^(-k/L), k = 1, 2, ..., as values of u."""

    def __init__(self, R0: float, per_decade: int):
        self.R0 = R0
        self.per_decade = per_decade
        self.k = 1

    @property
    def current(self) -> float:
        R = self.R0 * 10.0 ** (-self.k / self.per_decade)
        return R * R

    def advance(self) -> None:
        self.k += 1


def integrate(
    potential: PotentialLike,
    m: int,
    R0: float,
    opts: FlowOptions | None = None,
) -> Trajectory:
    """Integrate dR/dt = H from R0 until R <= r_stop, H stops being negative, or the step budget runs out."""
    check_dimension(m)
    opts = opts or FlowOptions()
    kahler = as_kahler(potential)
    if not (math.isfinite(R0) and R0 > opts.r_stop):
        raise InvalidInitialRadius(f"R0 = {R0} must be finite and above r_stop = {opts.r_stop}")
    R_star = monotone_radius(kahler, m, R0)
    if R_star < R0:
        raise InvalidInitialRadius(f"R0 = {R0} exceeds the radius R* = {R_star:.6g} up to which H < 0")

    u_stop = opts.r_stop * opts.r_stop
    stepper = DormandPrince54(
        lambda _t, u: 2.0 * _scaled_H(kahler, m, u),
        rel_tol=opts.rel_tol,
        abs_tol=opts.abs_tol,
    )
    t, u = 0.0, R0 * R0
    f0 = stepper.f(t, u)
    samples = [_sample(kahler, m, t, u, R=float(R0))]
    levels = _Levels(float(R0), opts.tail_levels_per_decade)
    stride = opts.output_stride
    next_output = 1

    h = stepper.initial_step(t, u, f0)
    status = FlowStatus.MAX_STEPS_EXCEEDED
    steps = rejected = 0
    for _ in range(opts.max_steps):
        if f0 < 0:
            h = min(h, opts.step_shrink_limit * u / -f0)
        if f0 < 0 and h < _TIME_RESOLUTION_ULPS * math.ulp(t):
            # Further steps are below the resolution of t; T_sing comes from the tail fit.
            logger.debug("Time resolution reached", extra={"t": t, "u": u, "h": h})
            if samples[-1].t < t:
                samples.append(_sample(kahler, m, t, u))
            status = FlowStatus.COLLAPSED
            break
        step = stepper.attempt(t, u, f0, h)
        if not step.accepted or step.y <= 0:
            rejected += 1
            logger.debug("Step rejected", extra={"t": t, "u": u, "h": h, "error_ratio": step.error_ratio})
            h = stepper.resize(h, step.error_ratio) if step.y > 0 else 0.5 * h
            continue
        steps += 1

        # Events are offsets from t inside the accepted step.
        span = step.t - t
        events = []
        while u_stop < levels.current < u and levels.current > step.y:
            level = levels.current
            events.append(
                brentq(
                    lambda s: hermite(0.0, u, f0, span, step.y, step.f, s) - level,
                    0.0,
                    span,
                    xtol=_EVENT_XTOL * span,
                )
            )
            levels.advance()
        if stride is not None:
            while next_output * stride < step.t:
                events.append(next_output * stride - t)
                next_output += 1
        for offset in sorted(events):
            if offset <= 0 or offset >= span or t + offset <= samples[-1].t:
                continue
            # Re-step from the start of the step for a value at full accuracy.
            sub = stepper.attempt(t, u, f0, offset)
            samples.append(_sample(kahler, m, t + offset, sub.y))

        t, u, f0 = step.t, step.y, step.f
        R = math.sqrt(u)
        rh = 0.5 * f0
        collapsed = u <= u_stop
        stalled = not collapsed and (rh >= 0 or abs(rh) < opts.stall_threshold * (R + 1.0))
        if stride is None or collapsed or stalled:
            samples.append(_sample(kahler, m, t, u))
        if collapsed:
            status = FlowStatus.COLLAPSED
            break
        if stalled:
            status = FlowStatus.STALLED
            break
        h = stepper.resize(h, step.error_ratio)
    else:
        if samples[-1].t < t:
            samples.append(_sample(kahler, m, t, u))

    T_sing = _extrapolate_T_sing(samples) if status == FlowStatus.COLLAPSED else None
    logger.info(
        "Flow integrated",
        extra={
            "potential": describe(kahler),
            "m": m,
            "R0": R0,
            "status": status.value,
            "steps": steps,
            "rejected": rejected,
            "T_sing": T_sing,
        },
    )
    return Trajectory(
        samples=tuple(samples),
        status=status,
        t_end=t,
        T_sing_trajectory=T_sing,
        R0=float(R0),
        m=int(m),
        steps=steps,
        rejected=rejected,
    )


def _extrapolate_T_sing(samples: Sequence[FlowSample]) -> float:
    """Fit u = R^2 linearly in t over the last decade of radii and return the root.

    Leading order u ~ 2c (T - t); the next correction is relative O(u), far
    below round-off in the last decade above r_stop.
    """
    last = samples[-1]
    tail = [s for s in samples if s.R <= 10.0 * last.R]
    if len(tail) < 2:
        tail = list(samples[-2:])
    tau = np.array([s.t - last.t for s in tail])
    u = np.array([s.R * s.R for s in tail])
    slope, intercept = np.polyfit(tau, u, 1)
    logger.debug("Tail fit", extra={"points": len(tail), "slope": slope, "intercept": intercept})
    return last.t - intercept / slope


def singularity_time_quadrature(potential: PotentialLike, m: int, R0: float) -> float:
    """T_sing = int_0^{R0^2} dS / (-2 R H(S)), with R H bounded and nonzero down to S = 0."""
    check_dimension(m)
    if not R0 > 0:
        raise InvalidInitialRadius(f"R0 must be positive, got {R0}")
    kahler = as_kahler(potential)

    def integrand(S: float) -> float:
        rh = _scaled_H(kahler, m, S)
        if rh >= 0:
            raise StallDetected(f"mean curvature is not negative at R = {math.sqrt(S):.6g}", R=math.sqrt(S))
        return -0.5 / rh

    value, abserr = quad(integrand, 0.0, R0 * R0, epsabs=1e-13, epsrel=1e-12, limit=200)
    logger.info(
        "Singularity time by quadrature",
        extra={"potential": describe(kahler), "m": m, "R0": R0, "T_sing": value, "abserr": abserr},
    )
    return float(value)


def asymptotic_constants(potential: PotentialLike, m: int) -> AsymptoticConstants:
    """Limits c = -lim R H, W0 = lim R^2 |A|^2 and W0 / (2c) = lim (T - t) |A|^2 at the divisor.

    For f = log S + g: c = 1 / ((2m-1) sqrt(g_S(0))) and W0 = 1 / g_S(0).
    """
    check_dimension(m)
    kahler = as_kahler(potential)
    if kahler.direct:
        c = -_scaled_H(kahler, m, 0.0)
        W0 = float(scaled_norm_A_squared(kahler, m, 0.0))
        if c <= 0:
            raise InvalidPotential("mean curvature is not negative near the collapse point")
    else:
        g_S0 = float(eval_g_jet(kahler.expr, 0.0).v1)
        if g_S0 <= 0:
            raise InvalidPotential(f"g_S(0) = {g_S0:.6g} <= 0: no collapse onto the exceptional divisor")
        c = 1.0 / ((2 * m - 1) * math.sqrt(g_S0))
        W0 = 1.0 / g_S0
    return AsymptoticConstants(c=c, W0=W0, limit_predicted=W0 / (2.0 * c))


def classify(
    potential: PotentialLike,
    m: int,
    R0: float,
    traj: Trajectory,
    *,
    r_min: float | None = None,
    r_max: float | None = None,
) -> SingularityReport:
    """Type I / Type II verdict from (T_sing - t) |A|^2 over the tail window r_min <= R <= r_max."""
    if traj.status != FlowStatus.COLLAPSED or traj.T_sing_trajectory is None:
        raise NotCollapsed(f"trajectory ended with status {traj.status.value}")
    kahler = as_kahler(potential)
    r_min = float(r_min if r_min is not None else settings.classify_tail_r_min)
    r_max = float(r_max if r_max is not None else settings.classify_tail_r_max)
    constants = asymptotic_constants(kahler, m)

    T = traj.T_sing_trajectory
    t = traj.times
    R = traj.radii
    A_sq = np.array([s.A_sq for s in traj.samples])
    products = (T - t) * A_sq
    window = (R >= r_min) & (R <= r_max)
    if window.sum() < 3:
        window = R <= 10.0 * R.min()
        window[-1] = False
    tail = products[window]
    if tail.size == 0:
        raise NotCollapsed("no samples in the classification window")
    spread = float((tail.max() - tail.min()) / abs(tail.mean()))
    estimate = float(tail[-1])

    if estimate > settings.type_ii_factor * constants.limit_predicted and bool(np.all(np.diff(tail) >= 0)):
        verdict = Verdict.TYPE_II
    elif spread < settings.type_i_spread:
        verdict = Verdict.TYPE_I
    else:
        verdict = Verdict.INCONCLUSIVE
    if verdict != Verdict.TYPE_I:
        logger.warning(
            "Singularity not classified as Type I",
            extra={"potential": describe(kahler), "m": m, "R0": R0, "verdict": verdict.value, "spread": spread},
        )

    resolved = R >= r_min
    return SingularityReport(
        potential=describe(kahler),
        m=int(m),
        R0=float(R0),
        T_sing_trajectory=T,
        T_sing_quadrature=singularity_time_quadrature(kahler, m, R0),
        T_sing_closed_form=closed_form_T_sing(kahler, m, R0),
        type_verdict=verdict,
        limit_estimate=estimate,
        limit_predicted=constants.limit_predicted,
        c_constant=constants.c,
        max_product=float(products[resolved].max()) if resolved.any() else estimate,
    )


def blow_up_locus_scan(
    potential: PotentialLike,
    m: int,
    R_max: float,
    samples: int,
    threshold: float = 100.0,
) -> list[float]:
    """Radii of a uniform grid on (0, R_max] where |A|^2 exceeds ``threshold``."""
    if not R_max > 0 or samples < 1:
        raise DomainError("R_max must be positive and samples >= 1")
    radii = np.linspace(R_max / samples, R_max, samples)
    A_sq = norm_A_squared(as_kahler(potential), m, radii)
    return radii[A_sq > threshold].tolist()


def time_reversed(
    potential: PotentialLike,
    m: int,
    R_start: float,
    duration: float,
    opts: FlowOptions | None = None,
) -> float:
    """Radius after running the expanding flow dR/dt = -H for ``duration`` from R_start."""
    check_dimension(m)
    opts = opts or FlowOptions()
    if not R_start > 0:
        raise InvalidInitialRadius(f"R_start must be positive, got {R_start}")
    if duration < 0:
        raise DomainError("duration must be nonnegative")
    kahler = as_kahler(potential)
    stepper = DormandPrince54(
        lambda _t, u: -2.0 * _scaled_H(kahler, m, u),
        rel_tol=opts.rel_tol,
        abs_tol=opts.abs_tol,
    )
    u, _ = integrate_to(stepper, 0.0, R_start * R_start, duration, opts.max_steps)
    return math.sqrt(u)


@dataclass(frozen=True)
class _SweepJob:
    text: str
    direct: bool
    m: int
    R0: float
    opts: FlowOptions


def _run_sweep_job(job: _SweepJob) -> dict:
    row = {"R0": job.R0, "T_sing": math.nan, "T_sing_quadrature": math.nan, "limit_estimate": math.nan,
           "verdict": None, "error": None}
    try:
        kahler = KahlerPotential(parse_potential(job.text), direct=job.direct)
        traj = integrate(kahler, job.m, job.R0, job.opts)
        report = classify(kahler, job.m, job.R0, traj)
    except CollapseError as exc:
        logger.warning("Sweep row failed", extra={"R0": job.R0, "code": exc.code, "error": exc.message})
        row["error"] = exc.code
        return row
    except Exception:
        logger.exception("Sweep row failed", extra={"R0": job.R0})
        row["error"] = InternalError.code
        return row
    row.update(
        T_sing=report.T_sing_trajectory,
        T_sing_quadrature=report.T_sing_quadrature,
        limit_estimate=report.limit_estimate,
        verdict=report.type_verdict.value,
    )
    logger.info("Sweep row done", extra={"R0": job.R0, "verdict": row["verdict"]})
    return row


def sweep(
    potential: PotentialLike,
    m: int,
    r0_values: Iterable[float],
    *,
    workers: int | None = None,
    opts: FlowOptions | None = None,
) -> pd.DataFrame:
    """One independent flow + classification per R0, on a process pool when workers > 1."""
    check_dimension(m)
    kahler = as_kahler(potential)
    opts = opts or FlowOptions()
    workers = int(workers if workers is not None else settings.sweep_workers)
    jobs = [_SweepJob(serialize(kahler.expr), kahler.direct, int(m), float(R0), opts) for R0 in r0_values]
    if workers <= 1 or len(jobs) <= 1:
        rows = [_run_sweep_job(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            rows = list(pool.map(_run_sweep_job, jobs))
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
