"""Exact quadrature of kernel integrals against piecewise-linear data.

For ``v`` piecewise linear on nodes ``y_0 < ... < y_n`` every integral
needed by the solvers,

    int J(x - y) v(y) dy        (convolution)
    int K(a - y) v(y) dy        (boundary flux),

is a finite sum of the kernel antiderivatives ``K, F, G`` at node offsets,
so the quadrature error is zero for the interpolant.  Discontinuous kernels
(the uniform family) are therefore handled without special casing.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import signal

from .kernels import Kernel, reflect

__all__ = [
    "falling_half",
    "rising_half",
    "full_hat",
    "conv_matrix",
    "tail_weights",
    "tail_integral",
    "left_tail_integral",
    "LatticeConvolver",
]

# below this relative cell width the antiderivative differences lose all
# digits; use a one-point rule instead
_TINY = 1e-9


def _small(e, z):
    return e <= _TINY * np.maximum(1.0, np.abs(z))


def falling_half(kernel: Kernel, z, e):
    """``int J(x-y) hat(y) dy`` for a hat falling from 1 at ``y_a`` to 0 at ``y_a+e``; ``z = x - y_a``."""
    z = np.asarray(z, dtype=float)
    e = np.broadcast_to(np.asarray(e, dtype=float), z.shape)
    safe = np.where(_small(e, z), 1.0, e)
    exact = -kernel.tail(z) + (kernel.tail_int(z) - kernel.tail_int(z - safe)) / safe
    approx = 0.5 * e * kernel(z - e / 3.0)
    return np.where(_small(e, z), approx, exact)


def rising_half(kernel: Kernel, z, e):
    """Hat rising from 0 at ``y_b-e`` to 1 at ``y_b``; ``z = x - y_b``."""
    z = np.asarray(z, dtype=float)
    e = np.broadcast_to(np.asarray(e, dtype=float), z.shape)
    safe = np.where(_small(e, z), 1.0, e)
    exact = kernel.tail(z) - (kernel.tail_int(z + safe) - kernel.tail_int(z)) / safe
    approx = 0.5 * e * kernel(z + e / 3.0)
    return np.where(_small(e, z), approx, exact)


def full_hat(kernel: Kernel, z, dx: float):
    z = np.asarray(z, dtype=float)
    F = kernel.tail_int
    return -(F(z + dx) - 2.0 * F(z) + F(z - dx)) / dx


def conv_matrix(kernel: Kernel, x, nodes) -> np.ndarray:
    """Matrix ``A`` with ``int_{y_0}^{y_n} J(x_i - y) v(y) dy = (A v)_i``."""
    x = np.asarray(x, dtype=float)[:, None]
    y = np.asarray(nodes, dtype=float)
    e = np.diff(y)[None, :]
    A = np.zeros((x.shape[0], len(y)))
    A[:, :-1] += falling_half(kernel, x - y[None, :-1], e)
    A[:, 1:] += rising_half(kernel, x - y[None, 1:], e)
    return A


def tail_weights(kernel: Kernel, front: float, nodes) -> np.ndarray:
    """Weights ``w`` with ``int K(front - y) v(y) dy = w . v`` (nodes left of ``front``)."""
    y = np.asarray(nodes, dtype=float)
    z = front - y
    F = kernel.tail_int(z)
    G = kernel.tail_int2(z)
    e = np.diff(y)
    w = np.zeros(len(y))
    small = _small(e, z[:-1])
    safe = np.where(small, 1.0, e)
    dG = (G[:-1] - G[1:]) / safe
    mid = kernel.tail(0.5 * (z[:-1] + z[1:]))
    w[:-1] += np.where(small, 0.5 * e * mid, F[:-1] - dG)
    w[1:] += np.where(small, 0.5 * e * mid, dG - F[1:])
    return w


def tail_integral(kernel: Kernel, front: float, nodes, values) -> float:
    return float(tail_weights(kernel, front, nodes) @ np.asarray(values, dtype=float))


def left_tail_integral(kernel: Kernel, front: float, nodes, values) -> float:
    """``int (1 - K(front - y)) v(y) dy`` for nodes right of ``front``."""
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    return tail_integral(reflect(kernel), -front, -nodes[::-1], values[::-1])


def _next_pow2(n: int) -> int:
    return 1 << max(4, int(math.ceil(math.log2(max(n, 1)))))


class LatticeConvolver:
    """Toeplitz convolution on the lattice ``x_i = i*dx``.

    The weight table depends only on ``dx`` and on a length chosen
    deterministically from the data size, so repeated calls on equal inputs
    give bitwise-equal results.
    """

    def __init__(self, kernel: Kernel, dx: float):
        self.kernel = kernel
        self.dx = float(dx)
        lo, hi = kernel.support
        if math.isfinite(lo) and math.isfinite(hi):
            self.fixed_kmax = int(math.ceil(max(abs(lo), abs(hi)) / self.dx)) + 2
        else:
            self.fixed_kmax = None
        self._cache = {}

    def weights(self, kmax: int) -> np.ndarray:
        w = self._cache.get(kmax)
        if w is None:
            k = np.arange(-kmax, kmax + 1, dtype=float) * self.dx
            w = full_hat(self.kernel, k, self.dx)
            self._cache[kmax] = w
        return w

    def kmax_for(self, n: int, pad: int) -> int:
        if self.fixed_kmax is not None:
            return max(self.fixed_kmax, 1)
        return _next_pow2(n + pad + 1)

    def convolve(self, i0: int, u: np.ndarray, g: float, h: float, pad: int) -> np.ndarray:
        """``int_g^h J(x-y) u(y) dy`` at lattice indices ``i0-pad .. i0+n-1+pad``.

        ``u`` holds the values at interior lattice nodes ``i0 .. i0+n-1``;
        the density is linear down to zero on the partial end cells.
        """
        n = len(u)
        dx = self.dx
        kmax = self.kmax_for(n, pad)
        w = self.weights(kmax)
        full = signal.convolve(u, w, mode="full")
        # full[q] sits at lattice index i0 - kmax + q
        start = kmax - pad
        out = np.zeros(n + 2 * pad)
        lo = max(start, 0)
        hi = min(start + n + 2 * pad, len(full))
        if hi > lo:
            out[lo - start : hi - start] = full[lo:hi]
        x = (i0 - pad + np.arange(n + 2 * pad)) * dx
        xa = i0 * dx
        xb = (i0 + n - 1) * dx
        e_left = xa - g
        e_right = h - xb
        kern = self.kernel
        out += u[0] * (rising_half(kern, x - xa, e_left) - rising_half(kern, x - xa, dx))
        out += u[-1] * (falling_half(kern, x - xb, e_right) - falling_half(kern, x - xb, dx))
        return out
