
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlfront.errors import InvalidParameter, ModelMismatch, WindowTooShort
from nlfront.experiments import bulk_convergence, comparison_harness, estimate_speed, fit_acceleration
from nlfront.free_boundary import FrontState, SimConfig, TimeSeries, run


def _series(t, h, g=None):
    g = -h if g is None else g
    return TimeSeries([(ti, gi, hi, 1.0, 1.0, 0.0, 0.0) for ti, gi, hi in zip(t, g, h)])


@settings(max_examples=30, deadline=None)
@given(c=st.floats(0.01, 5.0), b=st.floats(-3, 3))
def test_speed_exact_on_affine_series(c, b):
    t = np.linspace(0, 100, 101)
    est = estimate_speed(_series(t, c * t + b, -(0.5 * c * t + b)), "right", theory=c)
    assert est.slope == pytest.approx(c, rel=1e-12)
    assert est.rel_error < 1e-12
    assert estimate_speed(_series(t, c * t + b, -(0.5 * c * t + b)), "left").slope == pytest.approx(0.5 * c, rel=1e-12)


def test_speed_window_errors():
    t = np.linspace(0, 10, 8)
    with pytest.raises(WindowTooShort):
        estimate_speed(_series(t, t))
    with pytest.raises(InvalidParameter):
        estimate_speed(_series(np.linspace(0, 10, 50), np.linspace(0, 10, 50)), "up")


@pytest.mark.parametrize("p,C", [(2.0, 3.0), (1.5, 0.2), (3.0, 1.0)])
def test_power_fit_recovers_planted_law(p, C):
    t = np.linspace(1, 200, 400)
    fit = fit_acceleration(_series(t, C * t**p), "power")
    assert fit.params["p"] == pytest.approx(p, abs=1e-3)
    assert fit.params["C"] == pytest.approx(C, rel=1e-3)


def test_t_log_and_exp_root_fits():
    t = np.linspace(5, 300, 300)
    assert fit_acceleration(_series(t, 0.7 * t * np.log(t)), "t_log").params["C"] == pytest.approx(0.7, rel=1e-9)
    fit = fit_acceleration(_series(t, np.exp(1.3 * np.sqrt(t) + 0.2)), "exp_root", beta=2.0)
    assert fit.params["K"] == pytest.approx(1.3, rel=1e-9)
    with pytest.raises(InvalidParameter):
        fit_acceleration(_series(t, t), "exp_root")


def test_wrong_model_is_flagged():
    t = np.linspace(1, 100, 200)
    h = 5.0 + np.sin(t)
    with pytest.raises(ModelMismatch):
        fit_acceleration(_series(t, h), "power")


def test_harness_finds_no_violations(uniform, logistic):
    base = SimConfig(uniform, logistic, d=1.0, mu=1.0, h0=1.0, dx=0.05, dt=0.2, T_max=10.0)
    report = comparison_harness(base, n_pairs=3, seed=7)
    assert report.ok and report.pairs == 3
    assert report.comparisons == 3 * (int(round(10.0 / 0.2)) + 1)


def test_harness_detects_a_broken_order(uniform, logistic, monkeypatch):
    # swap the members of every pair: the ordering must now be reported as broken
    import nlfront.experiments as ex

    original = ex._ordered_pair

    def swapped(base, rng):
        lo, hi, info = original(base, rng)
        return hi, lo, info

    monkeypatch.setattr(ex, "_ordered_pair", swapped)
    base = SimConfig(uniform, logistic, d=1.0, mu=1.0, h0=1.0, dx=0.05, dt=0.2, T_max=4.0)
    report = comparison_harness(base, n_pairs=2, seed=1)
    assert not report.ok
    assert {v["kind"] for v in report.violations} & {"h", "g", "u"}


def test_bulk_convergence(uniform, logistic):
    cfg = SimConfig(uniform, logistic, d=1.0, mu=1.0, h0=1.0, dx=0.05, dt=0.2, T_max=60.0)
    _, state = run(cfg)
    rep = bulk_convergence(state, speed_region=(-0.05, 0.05))
    assert rep.applicable and rep.sup_deviation < 0.02
    dead = FrontState(10.0, -1.0, 1.0, 0.1, -9, np.full(19, 1e-7), 50)
    assert not bulk_convergence(dead, eps=0.2).applicable
    with pytest.raises(InvalidParameter):
        bulk_convergence(state)
    with pytest.raises(InvalidParameter):
        bulk_convergence(state, speed_region=(-10.0, 10.0))
