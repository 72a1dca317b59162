import math

import pytest

from app.errors import EvaluationOverflow, StepBudgetExceeded
from app.integrator import B4, B5, DormandPrince54, hermite, integrate_to


def test_weights_are_consistent():
    assert sum(B5) == pytest.approx(1.0, abs=1e-15)
    assert sum(B4) == pytest.approx(1.0, abs=1e-15)


def test_quartic_quadrature_is_exact():
    stepper = DormandPrince54(lambda t, _y: 5.0 * t**4)
    step = stepper.attempt(0.0, 0.0, 0.0, 1.0)
    assert step.y == pytest.approx(1.0, abs=1e-14)
    assert step.t == 1.0


def test_exponential_decay():
    stepper = DormandPrince54(lambda _t, y: -y, rel_tol=1e-11, abs_tol=1e-13)
    y, accepted = integrate_to(stepper, 0.0, 1.0, 2.0, max_steps=10_000)
    assert y == pytest.approx(math.exp(-2.0), rel=1e-9)
    assert accepted > 1


def test_integration_backwards_in_time():
    stepper = DormandPrince54(lambda _t, y: y)
    y, _ = integrate_to(stepper, 0.0, 1.0, -1.0, max_steps=10_000)
    assert y == pytest.approx(math.exp(-1.0), rel=1e-9)


def test_zero_duration_returns_the_start():
    stepper = DormandPrince54(lambda _t, y: y)
    assert integrate_to(stepper, 1.0, 3.0, 1.0, max_steps=1) == (3.0, 0)


def test_step_growth_is_bounded():
    stepper = DormandPrince54(lambda _t, _y: 1.0)
    step = stepper.attempt(0.0, 0.0, 1.0, 0.5)
    assert step.accepted
    assert stepper.resize(0.5, step.error_ratio) == pytest.approx(0.5 * stepper.max_factor)
    assert stepper.resize(1.0, 1e6) == pytest.approx(stepper.min_factor)


def test_first_same_as_last():
    stepper = DormandPrince54(lambda t, y: t - y)
    step = stepper.attempt(0.0, 1.0, -1.0, 0.1)
    assert step.f == pytest.approx(step.t - step.y, rel=1e-15)
    assert stepper.evaluations == 6


def test_cubic_hermite_reproduces_cubics():
    assert hermite(0.0, 0.0, 0.0, 1.0, 1.0, 3.0, 0.5) == pytest.approx(0.125, abs=1e-15)
    assert hermite(1.0, 1.0, 3.0, 2.0, 8.0, 12.0, 1.5) == pytest.approx(3.375, abs=1e-14)


def test_step_budget():
    stepper = DormandPrince54(lambda _t, y: -y)
    with pytest.raises(StepBudgetExceeded):
        integrate_to(stepper, 0.0, 1.0, 100.0, max_steps=2)


def test_non_finite_right_hand_side():
    stepper = DormandPrince54(lambda _t, _y: math.inf)
    with pytest.raises(EvaluationOverflow):
        stepper.f(0.0, 1.0)


def test_tolerances_must_be_positive():
    with pytest.raises(ValueError):
        DormandPrince54(lambda _t, y: y, rel_tol=0.0)


def test_hermite_on_a_zero_length_step():
    assert hermite(0.3, 1.0, 2.0, 0.3, 1.5, 2.0, 0.3) == 1.5
