import numpy as np
import pytest

from nlfront.errors import IntervalEmpty, InvalidParameter, StabilityViolation
from nlfront.fixed_domain import (
    assemble,
    ell_star,
    evolve_fixed,
    monotone_dt,
    principal_eigenvalue,
    steady_state,
)
from nlfront.kernels import KernelSpec, make_kernel


def test_uniform_rank_one_eigenvalue(uniform):
    # on an interval of length L <= 1 the uniform kernel is the constant 1/2,
    # so the operator is rank one with lambda = d L / 2 - d + f0
    L, d = 0.8, 2.0
    op = assemble(uniform, d, 0.0, (-L / 2, L / 2), 257, 1.0)
    lam = principal_eigenvalue(op).lambda_p
    assert lam == pytest.approx(d * L / 2 - d + 1.0, abs=1e-3)


@pytest.mark.parametrize("c", [0.0, 0.3])
def test_inverse_and_power_agree_with_dense_solver(gaussian, c):
    op = assemble(gaussian, 2.0, c, (-3.0, 3.0), 200, 1.0)
    ref = np.max(np.linalg.eigvals(op.matrix).real)
    inv = principal_eigenvalue(op, method="inverse")
    pw = principal_eigenvalue(op, method="power", tol=1e-9)
    assert inv.lambda_p == pytest.approx(ref, abs=1e-10)
    assert pw.lambda_p == pytest.approx(ref, abs=1e-8)
    assert np.all(inv.eigenfunction > 0)
    # Rayleigh residual relative to the sup norm of the eigenfunction
    assert inv.residual <= 1e-10 * np.max(np.abs(inv.eigenfunction))


def test_drift_breaks_symmetry_of_eigenfunction(gaussian):
    op = assemble(gaussian, 2.0, 0.5, (-4.0, 4.0), 256, 1.0)
    phi = principal_eigenvalue(op).eigenfunction
    x = op.nodes
    # the centre of mass moves off zero once a drift is switched on
    assert abs(np.sum(x * phi) / np.sum(phi)) > 1e-2


def test_assemble_errors(gaussian):
    with pytest.raises(IntervalEmpty):
        assemble(gaussian, 1.0, 0.0, (1.0, 1.0), 10)
    with pytest.raises(InvalidParameter):
        principal_eigenvalue(assemble(gaussian, 1.0, 0.0, (0, 1), 10), method="qr")


def test_ell_star_uniform_matches_rank_one_formula(uniform):
    # lambda = d L/2 - d + f0 vanishes at L = 2 (d - f0)/d = 1 for d = 2
    assert ell_star(uniform, 2.0, 1.0) == pytest.approx(1.0, abs=2e-4)


def test_ell_star_zero_when_diffusion_weak(uniform):
    assert ell_star(uniform, 0.5, 1.0) == 0.0


def test_ell_star_rejects_strong_drift():
    skew = make_kernel(KernelSpec("gaussian", {"s": 0.3}, shift=3.0))
    with pytest.raises(InvalidParameter, match="non-symmetric"):
        ell_star(skew, 2.0, 1.0)


def test_evolve_fixed_positive_and_bounded(uniform, logistic):
    u0 = np.linspace(0, 1, 41) * (1 - np.linspace(0, 1, 41)) * 4
    traj = evolve_fixed(uniform, logistic, (-4.0, 4.0), u0, 20.0, 0.4, 1.0)
    assert traj.u.min() >= 0
    assert traj.u.max() <= 1.0 + 1e-12
    with pytest.raises(StabilityViolation):
        evolve_fixed(uniform, logistic, (-4.0, 4.0), u0, 1.0, 0.6, 1.0)
    assert monotone_dt(1.0, logistic, 1.0) == pytest.approx(0.45)


def test_steady_state_solves_the_stationary_equation(uniform, logistic):
    interval, n, d = (-3.0, 3.0), 121, 1.0
    w = steady_state(uniform, logistic, interval, n, d)
    from nlfront.quadrature import conv_matrix

    x = np.linspace(*interval, n)
    r = d * conv_matrix(uniform, x, x) @ w - d * w + logistic(w)
    assert np.max(np.abs(r)) < 1e-8
    assert np.all(w > 0) and w.max() < 1
