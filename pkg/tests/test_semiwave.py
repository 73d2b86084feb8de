import numpy as np
import pytest

from nlfront.errors import DivergentFlux, InvalidParameter
from nlfront.kernels import KernelSpec, c_star, make_kernel
from nlfront.semiwave import (
    M_of_c,
    WaveKind,
    extract_wave,
    find_c0,
    find_c0_left,
    iterate_P,
    monotonizing_constant,
    residual,
    semiwave_profile,
)


@pytest.fixture(scope="module")
def cs(uniform):
    return c_star(uniform, 1.0, 1.0).value


def test_monotonizing_constant(logistic):
    # f(v) + c M v - d v nondecreasing needs c M >= d + max|f'| on [0, 2] = 1 + 3
    assert monotonizing_constant(logistic, 1.0, 0.5) == pytest.approx(4.0 / 0.5 + 0.1)


def test_iteration_ascends_monotonically(uniform, logistic, cs):
    prof = iterate_P(0.5 * cs, 1e-2, uniform, logistic, 1.0, 40.0, 641)
    assert prof.max_descent <= 1e-12
    assert prof.phi.max() <= 1.0 + 1e-12
    assert prof.phi[-1] == pytest.approx(1e-2)
    assert np.all(np.diff(prof.phi) <= 1e-14)


def test_residual_is_second_order(uniform, logistic, cs):
    r = [residual(semiwave_profile(0.5 * cs, uniform, logistic, 1.0, 40.0, n), uniform, logistic, 1.0)
         for n in (641, 1281)]
    assert r[0] / r[1] == pytest.approx(4.0, rel=0.1)


def test_trichotomy_labels(uniform, logistic, cs):
    semi = extract_wave(0.5 * cs, uniform, logistic, 1.0, n=641)
    assert semi.kind is WaveKind.SEMI
    assert semi.phi[-1] == 0.0 and semi.phi[0] > 0.999
    trav = extract_wave(1.1 * cs, uniform, logistic, 1.0, n=641)
    assert trav.kind is WaveKind.TRAVELING
    with pytest.raises(InvalidParameter):
        M_of_c(trav, uniform, 1.0)


def test_profiles_decrease_with_speed(uniform, logistic, cs):
    lo = semiwave_profile(0.3 * cs, uniform, logistic, 1.0, n=641)
    hi = semiwave_profile(0.6 * cs, uniform, logistic, 1.0, n=641)
    assert np.all(lo.phi >= hi.phi - 1e-12)
    assert M_of_c(lo, uniform, 1.0) > M_of_c(hi, uniform, 1.0)


def test_find_c0_is_fixed_point(uniform, logistic):
    sol = find_c0(uniform, logistic, 1.0, 1.0, n=641)
    assert abs(sol.c0 - sol.M) < 1e-6
    prof = semiwave_profile(sol.c0, uniform, logistic, 1.0, n=641)
    assert M_of_c(prof, uniform, 1.0) == pytest.approx(sol.c0, abs=1e-6)
    # a symmetric kernel has equal left and right speeds
    assert find_c0_left(uniform, logistic, 1.0, 1.0, n=641).c0 == pytest.approx(sol.c0, abs=1e-9)


def test_c0_increases_with_mu(uniform, logistic):
    a = find_c0(uniform, logistic, 0.5, 1.0, n=641).c0
    b = find_c0(uniform, logistic, 2.0, 1.0, n=641).c0
    assert a < b < c_star(uniform, 1.0, 1.0).value


def test_fat_tail_has_no_finite_speed(logistic):
    fat = make_kernel(KernelSpec("power_tail", {"alpha": 1.5, "lam": 0.25}))
    with pytest.raises(DivergentFlux):
        find_c0(fat, logistic, 1.0)


def test_argument_checks(uniform, logistic):
    with pytest.raises(InvalidParameter):
        iterate_P(-1.0, 0.1, uniform, logistic, 1.0, 10.0, 101)
    with pytest.raises(InvalidParameter):
        iterate_P(0.5, 1.0, uniform, logistic, 1.0, 10.0, 101)
    with pytest.raises(InvalidParameter):
        extract_wave(0.5, uniform, logistic, 1.0, deltas=(1e-3, 1e-2, 1e-1))


def test_shifted_kernel_has_distinct_finite_speeds(logistic):
    skew = make_kernel(KernelSpec("gaussian", {"s": 1.0}, shift=0.2))
    right = find_c0(skew, logistic, 1.0, 1.0, n=641).c0
    left = find_c0_left(skew, logistic, 1.0, 1.0, n=641).c0
    assert np.isfinite(right) and np.isfinite(left)
    assert right > left > 0


def test_delta_floor_limit_is_stable(uniform, logistic, cs):
    a = semiwave_profile(0.5 * cs, uniform, logistic, 1.0, n=641, delta=1e-6)
    b = semiwave_profile(0.5 * cs, uniform, logistic, 1.0, n=641, delta=5e-7)
    assert np.max(np.abs(a.phi - b.phi)) < 1e-4
