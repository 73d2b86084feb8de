import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from nlfront.kernels import KernelSpec, make_kernel
from nlfront.quadrature import LatticeConvolver, conv_matrix, left_tail_integral, tail_integral, tail_weights

KERNELS = {
    "uniform": KernelSpec("uniform", {"a": 1.0}),
    "gaussian": KernelSpec("gaussian", {"s": 0.8}, shift=0.2),
    "power": KernelSpec("power_tail", {"alpha": 2.5, "lam": 0.5}),
}


def _interp(nodes, vals):
    return lambda y: float(np.interp(y, nodes, vals))


def _ref_conv(kern, x, nodes, vals):
    pts = sorted({float(p) for p in nodes} | {x - b for b in kern.breakpoints} | {x + b for b in kern.breakpoints})
    pts = [p for p in pts if nodes[0] < p < nodes[-1]]
    f = lambda y: float(kern(np.array([x - y]))[0]) * _interp(nodes, vals)(y)  # noqa: E731
    return integrate.quad(f, nodes[0], nodes[-1], points=pts or None, limit=500, epsabs=1e-13)[0]


@pytest.mark.parametrize("name", KERNELS)
def test_conv_matrix_exact_for_piecewise_linear(name):
    kern = make_kernel(KERNELS[name])
    rng = np.random.default_rng(3)
    nodes = np.sort(rng.uniform(-2, 2, 9))
    vals = rng.uniform(0, 1, 9)
    x = np.array([-2.5, -0.3, 0.0, 1.7])
    got = conv_matrix(kern, x, nodes) @ vals
    ref = [_ref_conv(kern, xi, nodes, vals) for xi in x]
    np.testing.assert_allclose(got, ref, atol=1e-9)


@pytest.mark.parametrize("name", KERNELS)
def test_tail_integrals_exact(name):
    kern = make_kernel(KERNELS[name])
    nodes = np.linspace(-3.0, 1.0, 17)
    vals = np.sin(np.linspace(0.2, 2.9, 17)) ** 2
    front = 1.0
    f = lambda y: float(kern.tail(np.array([front - y]))[0]) * _interp(nodes, vals)(y)  # noqa: E731
    ref = integrate.quad(f, nodes[0], nodes[-1], points=list(nodes[1:-1]), limit=500, epsabs=1e-13)[0]
    assert tail_integral(kern, front, nodes, vals) == pytest.approx(ref, abs=1e-10)
    w = tail_weights(kern, front, nodes)
    assert w @ vals == pytest.approx(ref, abs=1e-10)
    # left front: int (1 - K(g - y)) v(y) dy with g at the left end
    g = nodes[0]
    f = lambda y: (1.0 - float(kern.tail(np.array([g - y]))[0])) * _interp(nodes, vals)(y)  # noqa: E731
    ref = integrate.quad(f, nodes[0], nodes[-1], points=list(nodes[1:-1]), limit=500, epsabs=1e-13)[0]
    assert left_tail_integral(kern, g, nodes, vals) == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("name", KERNELS)
def test_lattice_convolver_matches_dense_matrix(name):
    kern = make_kernel(KERNELS[name])
    dx = 0.1
    i0, n, pad = -7, 30, 4
    g, h = (i0 - 0.37) * dx, (i0 + n - 1 + 0.81) * dx
    rng = np.random.default_rng(0)
    u = rng.uniform(0.1, 1, n)
    nodes = np.concatenate([[g], (i0 + np.arange(n)) * dx, [h]])
    vals = np.concatenate([[0.0], u, [0.0]])
    x = (i0 - pad + np.arange(n + 2 * pad)) * dx
    ref = conv_matrix(kern, x, nodes) @ vals
    got = LatticeConvolver(kern, dx).convolve(i0, u, g, h, pad)
    np.testing.assert_allclose(got, ref, atol=1e-13)


@settings(max_examples=25, deadline=None)
@given(shift=st.integers(-50, 50))
def test_lattice_convolver_translation_invariant(shift):
    kern = make_kernel(KERNELS["gaussian"])
    conv = LatticeConvolver(kern, 0.05)
    u = np.linspace(0.2, 1.0, 40)
    a = conv.convolve(0, u, -0.02, 39 * 0.05 + 0.03, 3)
    b = conv.convolve(shift, u, shift * 0.05 - 0.02, (shift + 39) * 0.05 + 0.03, 3)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_constant_density_recovers_kernel_mass():
    # u = 1 on a grid wider than the support reproduces the unit mass
    kern = make_kernel(KERNELS["uniform"])
    nodes = np.linspace(-5, 5, 201)
    vals = np.ones_like(nodes)
    x = np.array([0.0, 2.5])
    got = conv_matrix(kern, x, nodes) @ vals
    np.testing.assert_allclose(got, 1.0, atol=1e-14)
