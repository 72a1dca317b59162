import math

import numpy as np
import pytest

from app.curvature import mean_curvature, norm_A_squared
from app.errors import DomainError, InvalidInitialRadius, InvalidPotential, NotCollapsed
from app.expression import parse_potential
from app.flow import (
    SWEEP_COLUMNS,
    TRAJECTORY_COLUMNS,
    FlowOptions,
    FlowStatus,
    Verdict,
    asymptotic_constants,
    blow_up_locus_scan,
    classify,
    integrate,
    monotone_radius,
    singularity_time_quadrature,
    sweep,
    time_reversed,
)
from app.oracles import burns_radius, burns_T_sing
from app.potential import KahlerPotential
from app.settings import settings

BURNS = KahlerPotential(parse_potential("S"))
FLAT = KahlerPotential.flat()
# H changes sign between R = 1.0 and R = 1.25 for m = 2.
BENDING = KahlerPotential(parse_potential("0.001*S + 0.1*log(1+S)"))


@pytest.fixture(scope="module")
def burns_unit():
    return integrate(BURNS, 2, 1.0)


@pytest.mark.parametrize("R0", [0.5, 1.0, 2.0])
def test_quadrature_matches_burns_closed_form(R0):
    assert singularity_time_quadrature(BURNS, 2, R0) == pytest.approx(burns_T_sing(R0), abs=1e-10)


@pytest.mark.parametrize("R0", [0.5, 1.0, 2.0, 5.0])
def test_trajectory_singular_time(R0):
    traj = integrate(BURNS, 2, R0)
    assert traj.status == FlowStatus.COLLAPSED
    assert traj.T_sing_trajectory == pytest.approx(burns_T_sing(R0), abs=1e-6)
    assert traj.final.R < 1e-6


@pytest.mark.parametrize("R0", [2.0, 5.0])
def test_large_spheres_collapse(R0):
    # Steps near T fall below ulp(T) before R reaches r_stop.
    traj = integrate(BURNS, 2, R0)
    assert traj.status == FlowStatus.COLLAPSED
    assert np.all(np.diff(traj.times) > 0)
    assert traj.final.t == pytest.approx(burns_T_sing(R0), abs=1e-6)
    assert classify(BURNS, 2, R0, traj).type_verdict == Verdict.TYPE_I


def test_trajectory_shape(burns_unit):
    first = burns_unit.samples[0]
    assert first.t == 0.0
    assert first.R == 1.0
    assert np.all(np.diff(burns_unit.times) > 0)
    assert np.all(np.diff(burns_unit.radii) < 0)
    assert burns_unit.final.R < 1e-7
    assert burns_unit.t_end == burns_unit.final.t
    assert burns_unit.steps > 0


def test_samples_carry_the_curvatures(burns_unit):
    for sample in burns_unit.samples[:: max(1, len(burns_unit.samples) // 10)]:
        assert sample.H == pytest.approx(mean_curvature(BURNS, 2, sample.R), rel=1e-9)
        assert sample.A_sq == pytest.approx(norm_A_squared(BURNS, 2, sample.R), rel=1e-9)


def test_trajectory_follows_the_implicit_solution():
    T = burns_T_sing(1.0)
    traj = integrate(BURNS, 2, 1.0, FlowOptions(output_stride=T / 60))
    interior = [s for s in traj.samples[1:] if s.R >= 0.05]
    assert len(interior) >= 50
    worst = max(abs(s.R - burns_radius(1.0, s.t)) for s in interior)
    assert worst < 1e-8


def test_output_stride_controls_the_body_of_the_trajectory():
    stride = 0.05
    traj = integrate(BURNS, 2, 1.0, FlowOptions(output_stride=stride))
    times = traj.times
    for k in range(1, int(burns_T_sing(1.0) / stride) + 1):
        assert np.min(np.abs(times - k * stride)) < 1e-12
    # Apart from stride points only the radius checkpoints R0 * 10^(-k/8) are kept.
    for sample in traj.samples[1:-1]:
        on_stride = abs(sample.t / stride - round(sample.t / stride)) < 1e-9
        level = -8 * math.log10(sample.R)
        assert on_stride or abs(level - round(level)) < 1e-3


def test_tail_checkpoints_sit_on_their_levels():
    traj = integrate(BURNS, 2, 1.0, FlowOptions(output_stride=0.05))
    tail = [s for s in traj.samples[1:-1] if s.R < 1e-4]
    assert len(tail) >= 20
    for sample in tail:
        level = -8 * math.log10(sample.R)
        assert abs(level - round(level)) < 1e-6


@pytest.mark.parametrize("m", [2, 3, 4])
def test_flat_sphere_collapses_at_half(m):
    traj = integrate(FLAT, m, 1.0)
    assert traj.status == FlowStatus.COLLAPSED
    assert traj.T_sing_trajectory == pytest.approx(0.5, abs=1e-8)
    for sample in traj.samples:
        assert sample.t == pytest.approx(0.5 * (1.0 - sample.R**2), abs=1e-12)
        if sample.R >= 1e-6:
            assert sample.R == pytest.approx(math.sqrt(1.0 - 2.0 * sample.t), abs=1e-8)
    assert singularity_time_quadrature(FLAT, m, 1.0) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("R0", [0.5, 1.0, 5.0])
def test_burns_singularity_is_type_one(R0):
    traj = integrate(BURNS, 2, R0)
    report = classify(BURNS, 2, R0, traj)
    assert report.type_verdict == Verdict.TYPE_I
    assert report.limit_estimate == pytest.approx(1.5, abs=1e-3)
    assert report.limit_predicted == pytest.approx(1.5, rel=1e-14)
    assert report.c_constant == pytest.approx(1.0 / 3.0, rel=1e-14)
    assert report.T_sing_closed_form == burns_T_sing(R0)


@pytest.mark.parametrize("R0", [0.5, 1.0])
def test_rescaled_curvature_stays_bounded(R0):
    report = classify(BURNS, 2, R0, integrate(BURNS, 2, R0))
    assert report.max_product <= 1.6


def test_flat_limit():
    report = classify(FLAT, 2, 1.0, integrate(FLAT, 2, 1.0))
    assert report.type_verdict == Verdict.TYPE_I
    assert report.limit_estimate == pytest.approx(1.5, abs=1e-3)
    assert report.T_sing_closed_form == 0.5
    assert report.potential == "f = S"


@pytest.mark.parametrize(
    "text, m, limit",
    [("2*S", 2, 0.75 * math.sqrt(2.0)), ("S", 3, 2.5), ("log(1+S) + S", 2, 0.75 * math.sqrt(2.0))],
)
def test_limit_depends_on_the_slope_at_the_divisor(text, m, limit):
    kahler = KahlerPotential(parse_potential(text))
    constants = asymptotic_constants(kahler, m)
    assert constants.limit_predicted == pytest.approx(limit, rel=1e-14)
    report = classify(kahler, m, 1.0, integrate(kahler, m, 1.0))
    assert report.type_verdict == Verdict.TYPE_I
    assert report.limit_estimate == pytest.approx(limit, abs=1e-3)


def test_asymptotic_constants():
    burns = asymptotic_constants(BURNS, 2)
    assert burns.c == pytest.approx(1.0 / 3.0)
    assert burns.W0 == 1.0
    assert burns.limit_predicted == pytest.approx(1.5)
    flat = asymptotic_constants(FLAT, 3)
    assert flat.c == pytest.approx(1.0)
    assert flat.W0 == pytest.approx(5.0)


def test_asymptotic_constants_match_the_curvature_near_the_divisor():
    constants = asymptotic_constants(BURNS, 2)
    R = 1e-4
    assert -R * mean_curvature(BURNS, 2, R) == pytest.approx(constants.c, rel=1e-6)
    assert R * R * norm_A_squared(BURNS, 2, R) == pytest.approx(constants.W0, rel=1e-6)


def test_asymptotic_constants_need_a_positive_slope():
    with pytest.raises(InvalidPotential):
        asymptotic_constants(KahlerPotential(parse_potential("S^2")), 2)


def test_monotone_radius():
    assert monotone_radius(BURNS, 2) == math.inf
    assert monotone_radius(FLAT, 3) == math.inf
    R_star = monotone_radius(BENDING, 2)
    assert 1.0 < R_star < 1.25
    assert mean_curvature(BENDING, 2, 0.99 * R_star) < 0
    assert mean_curvature(BENDING, 2, 1.01 * R_star) > 0


def test_initial_radius_must_lie_in_the_monotone_region():
    with pytest.raises(InvalidInitialRadius):
        integrate(BENDING, 2, 1.5)
    traj = integrate(BENDING, 2, 0.9)
    assert traj.status == FlowStatus.COLLAPSED


@pytest.mark.parametrize("R0", [1e-9, 0.0, math.inf, math.nan])
def test_initial_radius_must_be_above_r_stop(R0):
    with pytest.raises(InvalidInitialRadius):
        integrate(BURNS, 2, R0)


def test_blow_up_locus_scan():
    hits = blow_up_locus_scan(BURNS, 2, 1.0, 100)
    assert len(hits) == 10
    assert hits[0] == pytest.approx(0.01)
    assert hits[-1] == pytest.approx(0.1)
    assert blow_up_locus_scan(BURNS, 2, 1.0, 100, threshold=1e6) == []
    with pytest.raises(DomainError):
        blow_up_locus_scan(BURNS, 2, 0.0, 10)


def test_time_reversed_flow_returns_to_the_start(burns_unit):
    sample = min(burns_unit.samples, key=lambda s: abs(math.log10(s.R) + 3.0))
    assert time_reversed(BURNS, 2, sample.R, sample.t) == pytest.approx(1.0, abs=1e-6)
    assert time_reversed(BURNS, 2, 0.5, 0.0) == 0.5


def test_trajectory_table(burns_unit):
    table = burns_unit.to_frame()
    assert list(table.columns) == TRAJECTORY_COLUMNS
    assert len(table) == len(burns_unit.samples)


def test_report_dictionary(burns_unit):
    payload = classify(BURNS, 2, 1.0, burns_unit).to_dict()
    assert set(payload) == {"potential", "m", "R0", "T_sing", "verdict", "limit", "c"}
    assert set(payload["T_sing"]) == {"trajectory", "quadrature", "closed_form"}
    assert payload["verdict"] == "TypeI"
    assert payload["potential"] == "S"

    no_closed_form = classify(BURNS, 3, 1.0, integrate(BURNS, 3, 1.0)).to_dict()
    assert "closed_form" not in no_closed_form["T_sing"]


def test_report_summary(burns_unit):
    summary = classify(BURNS, 2, 1.0, burns_unit).summary()
    assert summary == "T_sing ≈ 0.962098, Type I, limit ≈ 1.500"


def test_classify_needs_a_collapsed_trajectory():
    traj = integrate(BURNS, 2, 1.0, FlowOptions(max_steps=5))
    assert traj.status == FlowStatus.MAX_STEPS_EXCEEDED
    assert traj.T_sing_trajectory is None
    with pytest.raises(NotCollapsed):
        classify(BURNS, 2, 1.0, traj)


def test_sweep_rows():
    table = sweep(BURNS, 2, [0.5, 1.0, 1e-9], workers=1)
    assert list(table.columns) == SWEEP_COLUMNS
    assert len(table) == 3
    for row in table.iloc[:2].itertuples(index=False):
        assert row.T_sing == pytest.approx(burns_T_sing(row.R0), abs=1e-6)
        assert row.T_sing_quadrature == pytest.approx(burns_T_sing(row.R0), abs=1e-10)
        assert row.verdict == "TypeI"
        assert row.error is None
    failed = table.iloc[2]
    assert failed["error"] == "invalid_initial_radius"
    assert math.isnan(failed["T_sing"])


def test_sweep_on_a_process_pool():
    serial = sweep(BURNS, 2, [0.5, 1.0], workers=1)
    pooled = sweep(BURNS, 2, [0.5, 1.0], workers=2)
    np.testing.assert_array_equal(serial["T_sing"].to_numpy(), pooled["T_sing"].to_numpy())


@pytest.mark.parametrize(
    "overrides",
    [{"r_stop": 0.0}, {"rel_tol": -1.0}, {"max_steps": 0}, {"output_stride": 0.0}, {"step_shrink_limit": 1.0}],
)
def test_flow_options_are_validated(overrides):
    with pytest.raises(DomainError):
        FlowOptions(**overrides)


def test_flow_options_follow_settings(monkeypatch):
    monkeypatch.setattr(settings, "flow_r_stop", 1e-4)
    opts = FlowOptions()
    assert opts.r_stop == 1e-4
    traj = integrate(BURNS, 2, 1.0, opts)
    assert traj.final.R <= 1e-4
    assert traj.final.R > 1e-5


def test_sweep_records_unexpected_failures(monkeypatch):
    def broken(*_args, **_kwargs):
        raise RuntimeError("boom")

    monkeypatch.setattr("app.flow.integrate", broken)
    table = sweep(BURNS, 2, [0.5, 1.0], workers=1)
    assert list(table["error"]) == ["internal_error", "internal_error"]
    assert table["T_sing"].isna().all()
