"""The nonlocal operator on a fixed interval.

``L[phi](x) = d int_Omega J(x-y) phi(y) dy - d phi + c phi' + f0 phi`` is
discretized on a uniform grid with exact hat-function weights, giving a
dense matrix with nonnegative off-diagonal entries.  Its rightmost
eigenvalue (the principal eigenvalue) controls persistence on the interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from .errors import BracketFailure, IntervalEmpty, InvalidParameter, NoConvergence, StabilityViolation
from .kernels import Kernel, c_star
from .quadrature import conv_matrix
from .reactions import Reaction

__all__ = [
    "OperatorDisc",
    "EigenResult",
    "Trajectory",
    "assemble",
    "principal_eigenvalue",
    "ell_star",
    "evolve_fixed",
    "steady_state",
    "monotone_dt",
]


@dataclass(frozen=True)
class OperatorDisc:
    interval: tuple
    n: int
    nodes: np.ndarray = field(repr=False)
    matrix: np.ndarray = field(repr=False)
    d: float
    c: float
    f0: float

    @property
    def length(self) -> float:
        return self.interval[1] - self.interval[0]


@dataclass(frozen=True)
class EigenResult:
    interval: tuple
    n: int
    lambda_p: float
    eigenfunction: np.ndarray = field(repr=False)
    iterations: int
    residual: float


def assemble(kernel: Kernel, d: float, c: float, interval, n: int, f0: float = 1.0) -> OperatorDisc:
    """Discretize the operator on ``interval`` with ``n`` uniform nodes.

    Parameters
    ----------
    kernel : Kernel
    d : float
        Dispersal rate.
    c : float
        Drift speed; ``c * phi'`` is upwinded so that off-diagonal entries stay
        nonnegative.  The one node without an upwind neighbour drops the term.
    interval : (float, float)
    n : int
        Node count (at least 8).
    f0 : float
        Linear growth rate ``f'(0)``.
    """
    l1, l2 = (float(v) for v in interval)
    if not l2 > l1:
        raise IntervalEmpty(f"interval ({l1}, {l2}) is empty")
    if n < 8:
        raise InvalidParameter(f"need at least 8 nodes, got {n}")
    if not d > 0:
        raise InvalidParameter("d must be > 0")
    nodes = np.linspace(l1, l2, n)
    A = d * conv_matrix(kernel, nodes, nodes)
    A[np.diag_indices(n)] += f0 - d
    if c != 0.0:
        h = nodes[1] - nodes[0]
        k = np.arange(n - 1)
        if c > 0:
            A[k, k] -= c / h
            A[k, k + 1] += c / h
        else:
            A[k + 1, k + 1] += c / h
            A[k + 1, k] -= c / h
    A.setflags(write=False)
    nodes.setflags(write=False)
    return OperatorDisc((l1, l2), n, nodes, A, float(d), float(c), float(f0))


def _cw_bounds(A, phi):
    r = (A @ phi) / phi
    return float(r.min()), float(r.max())


def _finish(op, phi, lam, it):
    phi = phi / phi.max()
    if not np.all(phi > 0):
        raise NoConvergence("eigenvector lost positivity")
    res = float(np.max(np.abs(op.matrix @ phi - lam * phi)))
    return EigenResult(op.interval, op.n, float(lam), phi, it, res)


def _power(op: OperatorDisc, tol: float, max_iter: int) -> EigenResult:
    A = op.matrix
    h = op.length / (op.n - 1)
    s = op.d + abs(op.f0) + abs(op.c) / h
    B = A + s * np.eye(op.n)
    phi = np.ones(op.n)
    for it in range(1, max_iter + 1):
        phi = B @ phi
        phi /= phi.max()
        if it % 10 == 0:
            lo, hi = _cw_bounds(A, phi)
            if hi - lo <= tol * max(1.0, abs(hi)):
                return _finish(op, phi, 0.5 * (lo + hi), it)
    raise NoConvergence(f"power iteration did not converge in {max_iter} iterations")


def _inverse(op: OperatorDisc, tol: float, max_iter: int) -> EigenResult:
    # shifted inverse iteration with the shift kept above the Collatz-Wielandt
    # upper bound, so (sigma - A) stays a nonsingular M-matrix and its
    # inverse is entrywise positive
    A = op.matrix
    n = op.n
    phi = np.ones(n)
    lo, hi = _cw_bounds(A, phi)
    gap = max(hi - lo, 1e-3 * max(1.0, abs(hi)))
    sigma = hi + gap
    lu = linalg.lu_factor(sigma * np.eye(n) - A)
    for it in range(1, max_iter + 1):
        phi = linalg.lu_solve(lu, phi)
        phi /= phi.max()
        lo, hi = _cw_bounds(A, phi)
        if hi - lo <= tol * max(1.0, abs(hi)):
            return _finish(op, phi, 0.5 * (lo + hi), it)
        if sigma - hi > 10.0 * (hi - lo) and hi - lo > 0:
            sigma = hi + 2.0 * (hi - lo)
            lu = linalg.lu_factor(sigma * np.eye(n) - A)
    raise NoConvergence(f"inverse iteration did not converge in {max_iter} iterations")


def principal_eigenvalue(
    op: OperatorDisc, tol: float = 1e-10, max_iter: int = 100_000, method: str = "inverse"
) -> EigenResult:
    """Rightmost eigenvalue and its positive eigenfunction.

    ``method="power"`` runs power iteration on ``A + s I`` with ``s`` large
    enough to make the matrix entrywise nonnegative.  ``"inverse"`` (default)
    uses shifted inverse iteration, which needs far fewer sweeps when the
    spectral gap is small.  Both stop when the Collatz-Wielandt bounds
    ``min/max (A phi)_i / phi_i`` agree to ``tol``.
    """
    if method == "power":
        return _power(op, tol, max_iter)
    if method == "inverse":
        return _inverse(op, tol, max_iter)
    raise InvalidParameter(f"unknown eigen method {method!r}")


def _lambda_at(kernel, d, f0, half, n_per_core, tol, method):
    n = max(64, int(math.ceil(2.0 * half / kernel.core_width * n_per_core)) + 1)
    op = assemble(kernel, d, 0.0, (-half, half), n, f0)
    return principal_eigenvalue(op, tol=tol, method=method).lambda_p


def ell_star(
    kernel: Kernel,
    d: float,
    f0: float,
    tol: float = 1e-4,
    n_per_core: int = 32,
    eig_tol: float = 1e-10,
    method: str = "inverse",
) -> float:
    """Critical length: the interval length at which the principal eigenvalue vanishes.

    Returns 0 when ``d <= f0``.  Otherwise the half-length is doubled until
    the eigenvalue turns positive and then bisected to ``tol`` (absolute, on
    the full length).
    """
    if not d > 0 or not f0 > 0:
        raise InvalidParameter("ell_star requires d > 0 and f0 > 0")
    if not (c_star(kernel, d, f0, "left").value < 0 < c_star(kernel, d, f0, "right").value):
        raise InvalidParameter("kernel is not weakly non-symmetric for these rates")
    if d <= f0:
        return 0.0
    lam = lambda half: _lambda_at(kernel, d, f0, half, n_per_core, eig_tol, method)  # noqa: E731
    lo, hi = 0.0, 0.25 * kernel.core_width
    for _ in range(40):
        if lam(hi) > 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise BracketFailure("principal eigenvalue stays negative on every tested length")
    while 2.0 * (hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        if lam(mid) > 0:
            hi = mid
        else:
            lo = mid
    return lo + hi


# ---------------------------------------------------------------------------
# fixed-interval evolution
# ---------------------------------------------------------------------------


def monotone_dt(d: float, reaction: Reaction, upper: float) -> float:
    """Largest step for which ``u -> u + dt (f(u) - d u)`` is nondecreasing on ``[0, upper]``."""
    return 0.9 / (d + reaction.lipschitz(upper))


@dataclass
class Trajectory:
    t: np.ndarray
    u: np.ndarray  # shape (records, nodes)
    nodes: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.u[-1]


def evolve_fixed(
    kernel: Kernel,
    reaction: Reaction,
    interval,
    u0,
    T: float,
    dt: float,
    d: float,
    record_every: int = 1,
) -> Trajectory:
    """Explicit Euler for ``V_t = d int J V - d V + f(V)`` on a fixed interval.

    ``u0`` are samples on ``len(u0)`` uniform nodes spanning ``interval``.
    """
    u = np.array(u0, dtype=float)
    if np.any(u < 0) or not np.any(u > 0):
        raise InvalidParameter("u0 must be nonnegative and not identically zero")
    n = len(u)
    l1, l2 = interval
    if not l2 > l1:
        raise IntervalEmpty(f"interval ({l1}, {l2}) is empty")
    upper = reaction.bound(float(u.max()))
    bound = monotone_dt(d, reaction, upper)
    if dt > bound:
        raise StabilityViolation(f"dt={dt:g} exceeds the monotone bound {bound:g}")
    nodes = np.linspace(l1, l2, n)
    A = d * conv_matrix(kernel, nodes, nodes)
    steps = int(round(T / dt))
    times, rows = [0.0], [u.copy()]
    for k in range(1, steps + 1):
        u = u + dt * (A @ u - d * u + reaction.f(u))
        if k % record_every == 0 or k == steps:
            times.append(k * dt)
            rows.append(u.copy())
    return Trajectory(np.array(times), np.array(rows), nodes)


def steady_state(
    kernel: Kernel,
    reaction: Reaction,
    interval,
    n: int,
    d: float,
    dt: Optional[float] = None,
    T: Optional[float] = None,
) -> np.ndarray:
    """Positive steady state by time marching from ``u = 1``.

    ``T`` defaults to ``500 / |lambda_p|`` (capped at ``1e5``).
    """
    op = assemble(kernel, d, 0.0, interval, n, reaction.f0)
    lam = principal_eigenvalue(op).lambda_p
    if T is None:
        T = min(500.0 / max(abs(lam), 1e-12), 1e5)
    if dt is None:
        dt = monotone_dt(d, reaction, reaction.bound(1.0))
    traj = evolve_fixed(kernel, reaction, interval, np.ones(n), T, dt, d, record_every=10**9)
    return traj.final
