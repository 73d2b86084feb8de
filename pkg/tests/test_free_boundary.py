from dataclasses import replace

import numpy as np
import pytest
from scipy import integrate

from nlfront.errors import BracketInvalid, InvalidParameter, StabilityViolation, ValidationError
from nlfront.fixed_domain import ell_star
from nlfront.free_boundary import (
    Outcome,
    SimConfig,
    classify_outcome,
    initial_profile,
    initial_state,
    left_flux,
    mu_star,
    right_flux,
    run,
    step,
)
from nlfront.kernels import KernelSpec, make_kernel


@pytest.fixture
def base(uniform, logistic):
    return SimConfig(uniform, logistic, d=1.0, mu=1.0, h0=1.0, dx=0.05, dt=0.2, T_max=10.0)


def test_initial_state_samples_profile_strictly_inside(base):
    s = initial_state(base)
    assert s.g == -1.0 and s.h == 1.0
    assert np.all((s.interior > s.g) & (s.interior < s.h))
    np.testing.assert_allclose(s.u, np.cos(0.5 * np.pi * s.interior))
    for shape in ("parabola", "tent"):
        assert initial_profile(shape, 2.0)(np.array([0.0]))[0] == 1.0


def test_fluxes_match_quadrature(base):
    s = initial_state(base)
    K = base.kernel
    u = lambda x: float(np.interp(x, s.nodes, s.values))  # noqa: E731
    pts = list(s.interior)
    ref_r = integrate.quad(lambda x: float(K.tail(np.array([s.h - x]))[0]) * u(x), s.g, s.h, points=pts, limit=400)[0]
    ref_l = integrate.quad(lambda x: (1 - float(K.tail(np.array([s.g - x]))[0])) * u(x), s.g, s.h, points=pts, limit=400)[0]
    assert right_flux(s, K, 0.7) == pytest.approx(0.7 * ref_r, abs=1e-10)
    assert left_flux(s, K, 0.7) == pytest.approx(0.7 * ref_l, abs=1e-10)


def test_validate_collects_every_problem(base):
    bad = replace(base, d=-1.0, dx=0.6, record_every=0)
    with pytest.raises(ValidationError) as info:
        bad.validate()
    text = str(info.value)
    assert "d must be" in text and "record_every" in text and "resolve the kernel core" in text
    assert len(info.value.violations) >= 3


def test_unstable_step_rejected(base):
    with pytest.raises(StabilityViolation):
        replace(base, dt=0.6).validate()
    with pytest.raises(StabilityViolation):
        step(initial_state(base), replace(base, dt=0.6))


def test_symmetric_setup_gives_mirror_fronts(base):
    series, state = run(base)
    np.testing.assert_allclose(series.g, -series.h, rtol=0, atol=1e-12)
    assert state.u.min() >= 0.0
    assert state.u.max() <= 1.0


def test_fronts_advance_and_density_stays_in_bounds(base):
    series, state = run(replace(base, T_max=20.0))
    assert np.all(np.diff(series.h) >= 0)
    assert np.all(np.diff(series.g) <= 0)
    assert series.sup_u.max() <= base.upper_bound()
    assert np.all(series.column("mass") > 0)


def test_run_is_deterministic(base, tmp_path):
    a, sa = run(base)
    b, sb = run(base)
    a.to_csv(tmp_path / "a.csv")
    b.to_csv(tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert np.array_equal(sa.u, sb.u)


def test_resume_is_bitwise(base):
    full, end = run(base)
    half, mid = run(base, stop_time=4.0)
    assert mid.t == pytest.approx(4.0)
    rest, end2 = run(base, mid, half)
    assert rest.rows == full.rows
    assert np.array_equal(end.u, end2.u) and end.h == end2.h


def test_picard_sweep_raises_time_order(uniform, logistic):
    def h_at(dt, picard):
        cfg = SimConfig(uniform, logistic, d=1.0, mu=1.0, h0=1.0, dx=0.0125, dt=dt, T_max=10.0, picard_iters=picard)
        return run(cfg)[1].h

    for picard, min_ratio in ((0, 1.8), (1, 3.5)):
        h = [h_at(dt, picard) for dt in (0.4, 0.2, 0.1)]
        assert (h[0] - h[1]) / (h[1] - h[2]) > min_ratio


def test_coarsening_keeps_even_nodes(uniform, logistic):
    cfg = SimConfig(uniform, logistic, d=1.0, mu=2.0, h0=1.0, dx=0.05, dt=0.2, T_max=20.0, max_nodes=100)
    series, state = run(cfg)
    assert len(state.u) <= 2 * cfg.max_nodes
    assert state.dx > cfg.dx
    ref, _ = run(replace(cfg, max_nodes=None))
    # coarsening perturbs the trajectory only at the grid-error level
    assert state.h == pytest.approx(ref.h[-1], rel=0.02)


def test_classification(uniform, logistic):
    ls = ell_star(uniform, 2.0, 1.0)
    tmpl = SimConfig(uniform, logistic, d=2.0, mu=1e-3, h0=0.25 * ls, dx=0.025, dt=0.1, T_max=200.0,
                     ell_star=ls, stop_on_decision=True)
    series, state = run(tmpl)
    assert classify_outcome(series, ls) is Outcome.VANISHING
    assert state.length <= ls
    series, _ = run(replace(tmpl, h0=0.6 * ls))
    assert classify_outcome(series, ls) is Outcome.SPREADING
    series, _ = run(replace(tmpl, T_max=0.2, stop_on_decision=False))
    assert classify_outcome(series, ls) is Outcome.UNDECIDED


def test_mu_star_bracket_checks(uniform, logistic):
    ls = ell_star(uniform, 2.0, 1.0)
    tmpl = SimConfig(uniform, logistic, d=2.0, mu=1.0, h0=0.25 * ls, dx=0.025, dt=0.1, T_max=200.0, ell_star=ls)
    with pytest.raises(BracketInvalid):
        mu_star(tmpl, (5.0, 1.0))
    with pytest.raises(BracketInvalid):
        mu_star(tmpl, (5.0, 10.0))
    with pytest.raises(InvalidParameter):
        mu_star(replace(tmpl, h0=0.6 * ls), (0.1, 10.0))
    trace = []
    m = mu_star(tmpl, (0.01, 20.0), tol=0.05, workers=2, trace=trace)
    assert 0.01 < m < 20.0
    assert trace[0] == (0.01, "Vanishing") and trace[1] == (20.0, "Spreading")


def test_shifted_kernel_biases_fronts(logistic):
    skew = make_kernel(KernelSpec("gaussian", {"s": 0.5}, shift=0.2))
    cfg = SimConfig(skew, logistic, d=1.0, mu=1.0, h0=1.0, dx=0.05, dt=0.2, T_max=10.0)
    _, state = run(cfg)
    assert state.h > -state.g


# frozen from a tol=1e-3 bisection with T_max doubled to 800 (dx=0.025, dt=0.1)
MU_STAR_REF = 1.0596


def test_mu_star_regression(uniform, logistic):
    ls = ell_star(uniform, 2.0, 1.0)
    tmpl = SimConfig(uniform, logistic, d=2.0, mu=1.0, h0=0.25 * ls, dx=0.025, dt=0.1, T_max=400.0, ell_star=ls)
    assert mu_star(tmpl, (0.01, 20.0), tol=1e-2, workers=2) == pytest.approx(MU_STAR_REF, rel=1e-2)
