"""Semi-wave profiles and the free-boundary speed.

The perturbed problem on ``x < 0``

    d int J(x-y) phi(y) dy - d phi + c phi' + f(phi) = 0,
    phi(-inf) = 1,   phi = delta on [0, inf),

is solved by the monotone fixed-point iteration ``Gamma_{k+1} = P[Gamma_k]``
started from ``Gamma_0 = delta``, where

    P[G](x) = e^{Mx} delta + (1/c) int_x^0 e^{M(x-s)} g(s) ds,
    g = d J*G + f(G) + c M G - d G.

The profile is sampled on a uniform grid of ``[-X, 0]`` and closed by
``phi = 1`` left of ``-X``.  ``g`` is taken piecewise linear between nodes,
so the ``ds`` integral is an exact exponential recurrence run right to left
with :func:`scipy.signal.lfilter`.

Letting ``delta -> 0`` gives either a semi-wave (the half-level anchor
settles) or a traveling wave (the anchor runs off to ``-inf``).  The speed
``c0`` of the free boundary solves ``c = M(c)`` where ``M(c)`` is the flux
of the semi-wave.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize, signal

from .errors import BracketFailure, DivergentFlux, Inconclusive, InvalidParameter, NoConvergence, TruncationTooShallow
from .kernels import Kernel, c_star, reflect
from .quadrature import LatticeConvolver, tail_integral
from .reactions import Reaction

__all__ = [
    "WaveKind",
    "PerturbedProfile",
    "WaveProfile",
    "SpeedSolve",
    "monotonizing_constant",
    "iterate_P",
    "extract_wave",
    "semiwave_profile",
    "M_of_c",
    "find_c0",
    "find_c0_left",
    "residual",
    "DEFAULT_DELTAS",
]

PROFILE_TOL = 1e-4
DEFAULT_DELTAS = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


class WaveKind(str, enum.Enum):
    SEMI = "SemiWave"
    TRAVELING = "TravelingWave"


@dataclass(frozen=True)
class PerturbedProfile:
    c: float
    delta: float
    M_const: float
    X: float
    x: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    iterations: int
    sup_change: float
    # largest decrease seen between consecutive iterates (0 for a monotone ascent)
    max_descent: float = 0.0


@dataclass(frozen=True)
class WaveProfile:
    kind: WaveKind
    c: float
    x: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    front_anchor: float
    anchors: tuple = ()
    X: float = 0.0


@dataclass(frozen=True)
class SpeedSolve:
    c0: float
    M: float
    residual: float
    bracket: tuple
    history: tuple = ()


def monotonizing_constant(reaction: Reaction, d: float, c: float) -> float:
    """``M`` making ``f(v) + c M v - d v`` nondecreasing on ``[0, 2]``, plus a 0.1 margin."""
    fmax = reaction.lipschitz(2.0)
    return (d + fmax) / c + 0.1


class _Grid:
    """Uniform grid on ``[-X, 0]`` with the convolution closure."""

    def __init__(self, kernel: Kernel, X: float, n: int):
        if not X > 0 or n < 8:
            raise InvalidParameter("need X > 0 and n >= 8")
        self.kernel = kernel
        self.X = float(X)
        self.n = int(n)
        self.dx = self.X / (n - 1)
        self.idx0 = -(n - 1)
        self.x = (self.idx0 + np.arange(n)) * self.dx
        self.x[-1] = 0.0
        self.conv = LatticeConvolver(kernel, self.dx)
        # mass from phi = 1 left of -X and from the right half-line
        self.left_mass = kernel.tail(self.x + self.X)
        self.right_mass = 1.0 - kernel.tail(self.x)

    def convolve(self, phi: np.ndarray, delta: float) -> np.ndarray:
        inner = self.conv.convolve(self.idx0, phi, self.x[0], 0.0, 0)
        return inner + self.left_mass + delta * self.right_mass


class _Stepper:
    """Right-to-left exponential recurrence for ``P``."""

    def __init__(self, grid: _Grid, c: float, M: float):
        h = grid.dx
        a = M * h
        E = math.exp(-a)
        self.gamma = (1.0 - E * (1.0 + a)) / (M * a) if a > 1e-6 else h / 2.0 - M * h * h / 3.0
        self.alpha = (1.0 - E) / M - self.gamma if a > 1e-6 else h / 2.0 - M * h * h / 6.0
        self.E = E
        self.c = c
        self.M = M
        self.edelta = np.exp(M * grid.x)

    def apply(self, g: np.ndarray, delta: float) -> np.ndarray:
        # I_i = E I_{i+1} + alpha g_i + gamma g_{i+1}, I_{n-1} = 0
        src = self.alpha * g[:-1] + self.gamma * g[1:]
        rev = signal.lfilter([1.0], [1.0, -self.E], src[::-1])
        I = np.concatenate([rev[::-1], [0.0]])
        return self.edelta * delta + I / self.c


def _sweep(phi, grid, stepper, reaction, d, c, M, delta):
    g = d * grid.convolve(phi, delta) + reaction.f(phi) + c * M * phi - d * phi
    return stepper.apply(g, delta)


def iterate_P(
    c: float,
    delta: float,
    kernel: Kernel,
    reaction: Reaction,
    d: float,
    X: float,
    n: int,
    tol: float = 1e-10,
    max_iter: int = 200_000,
    start: Optional[np.ndarray] = None,
    check_depth: bool = True,
) -> PerturbedProfile:
    """Monotone iteration for the perturbed semi-wave problem.

    Parameters
    ----------
    c, delta : float
        Speed (> 0) and right-hand floor (in ``[0, 1)``).
    X, n : float, int
        Truncation depth and node count of the grid on ``[-X, 0]``.
    start : array, optional
        Initial iterate; defaults to the constant ``delta``.  Starting above a
        fixed point (e.g. from a profile with larger ``delta``) makes the
        iteration descend instead.
    check_depth : bool
        Raise :class:`TruncationTooShallow` when ``phi(-X) < 1 - 10*PROFILE_TOL``.
    """
    if not c > 0:
        raise InvalidParameter("c must be > 0")
    if not 0.0 <= delta < 1.0:
        raise InvalidParameter("delta must lie in [0, 1)")
    grid = _Grid(kernel, X, n)
    M = monotonizing_constant(reaction, d, c)
    stepper = _Stepper(grid, c, M)
    phi = np.full(n, float(delta)) if start is None else np.array(start, dtype=float)
    max_descent = 0.0
    change = math.inf
    for it in range(1, max_iter + 1):
        new = _sweep(phi, grid, stepper, reaction, d, c, M, delta)
        diff = new - phi
        max_descent = max(max_descent, float(-diff.min()))
        change = float(np.max(np.abs(diff)))
        phi = new
        if change < tol:
            break
    else:
        raise NoConvergence(f"P-iteration at c={c:g}, delta={delta:g} did not reach tol={tol:g} ({change:.3g})")
    if check_depth and phi[0] < 1.0 - 10.0 * PROFILE_TOL:
        raise TruncationTooShallow(f"phi(-X) = {phi[0]:.6f} at X={X:g}; increase X")
    return PerturbedProfile(c, float(delta), M, float(X), grid.x.copy(), phi, it, change, max_descent)


def _anchor(x: np.ndarray, phi: np.ndarray) -> float:
    """``max{x : phi(x) = 1/2}`` by linear interpolation (``-inf`` when phi < 1/2 throughout)."""
    above = np.nonzero(phi >= 0.5)[0]
    if len(above) == 0:
        return -math.inf
    i = above[-1]
    if i == len(phi) - 1:
        return float(x[-1])
    t = (phi[i] - 0.5) / (phi[i] - phi[i + 1])
    return float(x[i] + t * (x[i + 1] - x[i]))


def _classify_anchors(anchors: Sequence[float], X: float, dx: float) -> Optional[WaveKind]:
    a = np.asarray(anchors)
    if np.any(~np.isfinite(a)) or np.any(a < -0.5 * X):
        return WaveKind.TRAVELING
    inc = np.abs(np.diff(a))
    if len(inc) < 2:
        return None
    settle = max(2.0 * dx, 1e-3)
    if inc[-1] <= settle and inc[-1] <= 0.5 * max(inc[-2], settle):
        return WaveKind.SEMI
    if inc[-1] > settle and inc[-1] >= 0.7 * inc[-2]:
        return WaveKind.TRAVELING
    return None


def extract_wave(
    c: float,
    kernel: Kernel,
    reaction: Reaction,
    d: float,
    deltas: Sequence[float] = DEFAULT_DELTAS,
    X: float = 40.0,
    n: int = 2561,
    tol: float = 1e-10,
    max_iter: int = 200_000,
    grow_X: int = 3,
    delta_floor: float = 1e-12,
) -> WaveProfile:
    """Classify speed ``c`` as semi-wave or traveling-wave and return the profile.

    Runs the monotone iteration along the decreasing ``deltas`` and tracks
    the half-level anchor, continuing in factors of 10 down to
    ``delta_floor`` while the anchors are undecided.  Anchors that settle
    give a semi-wave, polished by a ``delta = 0`` descent so that
    ``phi(0) = 0``.  Anchors that keep
    drifting by a steady amount per step, or pass ``-X/2``, give a traveling
    wave, returned shifted so that ``phi(0) = 1/2``.

    ``X`` is doubled (with the grid spacing held fixed) up to ``grow_X`` times
    when a semi-wave does not reach ``1 - 10*PROFILE_TOL`` at ``-X``.
    """
    deltas = [float(v) for v in deltas]
    if len(deltas) < 3 or any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise InvalidParameter("deltas must be a decreasing sequence of at least 3 values")
    for attempt in range(grow_X + 1):
        anchors = []
        profiles = []
        dx = X / (n - 1)
        kind = None
        schedule = list(deltas)
        while schedule:
            delta = schedule.pop(0)
            prof = iterate_P(c, delta, kernel, reaction, d, X, n, tol, max_iter, check_depth=False)
            profiles.append(prof)
            anchors.append(_anchor(prof.x, prof.phi))
            if schedule:
                continue
            kind = _classify_anchors(anchors, X, dx)
            # undecided: keep shrinking delta while it stays above the floor
            if kind is None and delta / 10.0 >= delta_floor:
                schedule.append(delta / 10.0)
        if kind is WaveKind.TRAVELING:
            last = profiles[-1]
            a = anchors[-1] if math.isfinite(anchors[-1]) else float(last.x[0])
            return WaveProfile(WaveKind.TRAVELING, c, last.x - a, last.phi, 0.0, tuple(anchors), X)
        if kind is None:
            raise Inconclusive(f"anchors {np.round(anchors, 4).tolist()} neither settle nor clear -X/2; grow X")
        polished = iterate_P(c, 0.0, kernel, reaction, d, X, n, tol, max_iter, start=profiles[-1].phi, check_depth=False)
        if polished.phi[0] >= 1.0 - 10.0 * PROFILE_TOL:
            phi = polished.phi.copy()
            phi[-1] = 0.0
            return WaveProfile(WaveKind.SEMI, c, polished.x, phi, _anchor(polished.x, phi), tuple(anchors), X)
        if attempt < grow_X:
            X, n = 2.0 * X, 2 * n - 1
    raise TruncationTooShallow(f"semi-wave at c={c:g} has phi(-X) = {polished.phi[0]:.6f} even at X={X:g}")


def semiwave_profile(
    c: float,
    kernel: Kernel,
    reaction: Reaction,
    d: float,
    X: float = 40.0,
    n: int = 2561,
    delta: float = 1e-6,
    tol: float = 1e-10,
    max_iter: int = 200_000,
) -> WaveProfile:
    """Semi-wave at a speed known to lie below ``c_star``: ascend at ``delta``, then descend at 0."""
    up = iterate_P(c, delta, kernel, reaction, d, X, n, tol, max_iter, check_depth=False)
    down = iterate_P(c, 0.0, kernel, reaction, d, X, n, tol, max_iter, start=up.phi, check_depth=False)
    phi = down.phi.copy()
    phi[-1] = 0.0
    return WaveProfile(WaveKind.SEMI, c, down.x, phi, _anchor(down.x, phi), (), X)


def M_of_c(profile: WaveProfile, kernel: Kernel, mu: float) -> float:
    """Front flux of a semi-wave: ``mu * int_{-inf}^0 K(-x) phi(x) dx``.

    The part left of ``-X`` uses ``phi = 1``.
    """
    if profile.kind is not WaveKind.SEMI:
        raise InvalidParameter("M_of_c needs a semi-wave profile")
    if not kernel.tail_class.j1_plus:
        raise DivergentFlux("kernel has an infinite right first moment; the front flux diverges")
    X = -float(profile.x[0])
    inner = tail_integral(kernel, 0.0, profile.x, profile.phi)
    far = kernel.first_moment_plus() - float(kernel.tail_int(np.array([X]))[0])
    return mu * (inner + far)


def find_c0(
    kernel: Kernel,
    reaction: Reaction,
    mu: float,
    d: float = 1.0,
    tol: float = 1e-6,
    X: float = 40.0,
    n: int = 2561,
    c_lo: float = 1e-3,
) -> SpeedSolve:
    """Unique root of ``c = M(c)`` in ``(0, c_star)``.

    ``c - M(c)`` is increasing; the bracket starts at ``c_lo`` (where it is
    negative) and doubles upward, capped just below the linear speed.
    """
    if not kernel.tail_class.j1_plus:
        raise DivergentFlux("kernel has an infinite right first moment; no finite front speed")
    if not mu > 0:
        raise InvalidParameter("mu must be > 0")
    cs = c_star(kernel, d, reaction.f0, "right").value
    if not cs > 0:
        raise BracketFailure("linear spreading speed is not positive")
    history = []

    def P(c):
        prof = semiwave_profile(c, kernel, reaction, d, X, n, tol=1e-11)
        m = M_of_c(prof, kernel, mu)
        history.append((c, m))
        return c - m

    lo = c_lo
    if not P(lo) < 0:
        raise BracketFailure(f"c - M(c) is not negative at c={lo:g}")
    cap = 0.999 * cs if math.isfinite(cs) else math.inf
    hi = min(2.0 * lo, cap)
    while P(hi) < 0:
        if hi >= cap:
            raise BracketFailure("c - M(c) stays negative up to the linear speed")
        lo, hi = hi, min(2.0 * hi, cap)
    c0 = optimize.brentq(P, lo, hi, xtol=0.1 * tol, rtol=4 * np.finfo(float).eps)
    prof = semiwave_profile(c0, kernel, reaction, d, X, n, tol=1e-11)
    m = M_of_c(prof, kernel, mu)
    res = abs(c0 - m)
    if res >= tol:
        raise NoConvergence(f"|c0 - M(c0)| = {res:.3g} above tol={tol:g}")
    return SpeedSolve(float(c0), float(m), float(res), (lo, hi), tuple(history))


def find_c0_left(
    kernel: Kernel,
    reaction: Reaction,
    mu: float,
    d: float = 1.0,
    tol: float = 1e-6,
    X: float = 40.0,
    n: int = 2561,
) -> SpeedSolve:
    """Speed magnitude of the left front, from the reflected kernel."""
    return find_c0(reflect(kernel), reaction, mu, d, tol, X, n)


def residual(profile: WaveProfile, kernel: Kernel, reaction: Reaction, d: float) -> float:
    """Sup-norm residual of the wave equation at interior nodes.

    Semi-waves use the half-line equation (``phi = 0`` right of 0); traveling
    waves use the full-line equation with ``phi = 0`` to the right of the
    sampled range.  ``phi`` is taken as 1 left of the sampled range and
    ``phi'`` is a centered difference.
    """
    x, phi = profile.x, profile.phi
    n = len(x)
    dx = (x[-1] - x[0]) / (n - 1)
    conv = LatticeConvolver(kernel, dx)
    # shift to lattice coordinates starting at 0; the convolution is translation invariant
    inner = conv.convolve(0, phi, 0.0, (n - 1) * dx, 0)
    total = inner + kernel.tail(x - x[0])
    dphi = (phi[2:] - phi[:-2]) / (2.0 * dx)
    r = d * total[1:-1] - d * phi[1:-1] + profile.c * dphi + reaction.f(phi[1:-1])
    return float(np.max(np.abs(r)))
