"""Time stepping of the nonlocal free-boundary problem.

The density lives on the fixed lattice ``x_i = i*dx``; the fronts ``g < h``
are exact reals decoupled from it.  ``u`` is the piecewise-linear
interpolant through the interior lattice nodes and ``u(g) = u(h) = 0``, so
every integral the scheme needs is evaluated exactly by
:mod:`nlfront.quadrature`.

One explicit Euler step:

* interior nodes: ``u += dt * (d * J*u - d*u + f(u))``;
* fronts: ``h += dt * right_flux``, ``g -= dt * left_flux``;
* a lattice node overtaken by a front at time ``t_x`` inside the step gets
  ``u = (t + dt - t_x) * d * (J*u)(x)``, the exact first-order solution of
  its node ODE started from zero at ``t_x``.

With ``dt <= 0.9 / (d + Lip f)`` every update is monotone in the data, so
positivity, the invariant bound and the comparison principle carry over to
the discrete solution.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, List, Optional, Union

import numpy as np
from scipy.integrate import trapezoid

from .errors import (
    BlowUp,
    BracketInvalid,
    InvalidParameter,
    StabilityViolation,
    UndecidedBudget,
    ValidationError,
)
from .kernels import Kernel
from .quadrature import LatticeConvolver, left_tail_integral, tail_integral
from .reactions import Reaction

__all__ = [
    "FrontState",
    "SimConfig",
    "TimeSeries",
    "Thresholds",
    "Outcome",
    "initial_profile",
    "initial_state",
    "right_flux",
    "left_flux",
    "step",
    "run",
    "classify_outcome",
    "mu_star",
    "SERIES_COLUMNS",
]

SERIES_COLUMNS = ("t", "g", "h", "sup_u", "mass", "right_flux", "left_flux")

PROFILES = ("cosine", "parabola", "tent")


def initial_profile(shape: str, h0: float, amplitude: float = 1.0) -> Callable:
    """Initial densities positive on ``(-h0, h0)`` and zero at the ends."""
    if shape == "cosine":
        return lambda x: amplitude * np.cos(0.5 * np.pi * np.asarray(x) / h0)
    if shape == "parabola":
        return lambda x: amplitude * (1.0 - (np.asarray(x) / h0) ** 2)
    if shape == "tent":
        return lambda x: amplitude * (1.0 - np.abs(np.asarray(x)) / h0)
    raise InvalidParameter(f"unknown initial profile {shape!r}; expected one of {PROFILES}")


@dataclass(frozen=True)
class Thresholds:
    eps_vanish: float = 1e-4
    margin_frac: float = 0.05
    stall_rel: float = 1e-6
    stall_window: float = 0.1


class Outcome(str, enum.Enum):
    SPREADING = "Spreading"
    VANISHING = "Vanishing"
    UNDECIDED = "Undecided"


@dataclass
class SimConfig:
    """Parameters of one free-boundary run.

    ``u0`` is a profile name (see :func:`initial_profile`) scaled by
    ``u0_amplitude``, or a callable on ``[-h0, h0]``.  ``max_nodes`` turns on
    dyadic coarsening of the lattice for long accelerating runs.
    """

    kernel: Kernel
    reaction: Reaction
    d: float
    mu: float
    h0: float
    dx: float
    dt: float
    T_max: float
    u0: Union[str, Callable] = "cosine"
    u0_amplitude: float = 1.0
    picard_iters: int = 0
    record_every: int = 1
    max_nodes: Optional[int] = None
    ell_star: Optional[float] = None
    stop_on_decision: bool = False
    thresholds: Thresholds = field(default_factory=Thresholds)

    def profile(self) -> Callable:
        if callable(self.u0):
            return self.u0
        return initial_profile(self.u0, self.h0, self.u0_amplitude)

    def u0_sup(self) -> float:
        x = np.linspace(-self.h0, self.h0, 2001)
        return float(np.max(self.profile()(x)))

    def upper_bound(self) -> float:
        return self.reaction.bound(self.u0_sup())

    def dt_monotone(self) -> float:
        return 0.9 / (self.d + self.reaction.lipschitz(self.upper_bound()))

    def validate(self) -> None:
        problems = []
        for name in ("d", "mu", "h0", "dx", "dt", "T_max"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                problems.append(f"{name} must be a positive finite number, got {v!r}")
        if self.picard_iters < 0:
            problems.append("picard_iters must be >= 0")
        if self.record_every < 1:
            problems.append("record_every must be >= 1")
        if self.max_nodes is not None and self.max_nodes < 16:
            problems.append("max_nodes must be >= 16")
        if self.dx > 0 and self.dx > self.kernel.core_width / 8.0:
            problems.append(f"dx={self.dx:g} must resolve the kernel core (<= {self.kernel.core_width / 8.0:g})")
        if self.h0 > 0 and self.dx > 0 and self.dx >= self.h0:
            problems.append("dx must be smaller than h0")
        if self.stop_on_decision and self.ell_star is None:
            problems.append("stop_on_decision requires ell_star")
        if problems:
            raise ValidationError(problems)
        u = self.profile()(np.linspace(-self.h0, self.h0, 2001)[1:-1])
        if np.any(u <= 0) or not np.all(np.isfinite(u)):
            raise ValidationError(["u0 must be positive inside (-h0, h0)"])
        if self.dt * (self.d + self.reaction.lipschitz(self.upper_bound())) >= 1.0:
            raise StabilityViolation(f"dt={self.dt:g} breaks positivity; need dt*(d + Lip f) < 1")
        if self.dt > self.dt_monotone():
            raise StabilityViolation(f"dt={self.dt:g} exceeds the monotone bound {self.dt_monotone():g}")


@dataclass
class FrontState:
    """Solution snapshot.

    ``u`` holds the density at the interior lattice nodes
    ``i0*dx, ..., (i0+len(u)-1)*dx``, all strictly inside ``(g, h)``.
    """

    t: float
    g: float
    h: float
    dx: float
    i0: int
    u: np.ndarray
    steps: int = 0

    @property
    def interior(self) -> np.ndarray:
        return (self.i0 + np.arange(len(self.u))) * self.dx

    @property
    def nodes(self) -> np.ndarray:
        return np.concatenate([[self.g], self.interior, [self.h]])

    @property
    def values(self) -> np.ndarray:
        return np.concatenate([[0.0], self.u, [0.0]])

    @property
    def sup_u(self) -> float:
        return float(self.u.max()) if len(self.u) else 0.0

    @property
    def mass(self) -> float:
        return float(trapezoid(self.values, self.nodes))

    @property
    def length(self) -> float:
        return self.h - self.g


@dataclass
class TimeSeries:
    rows: List[tuple] = field(default_factory=list)

    def append(self, state: FrontState, rflux: float, lflux: float) -> None:
        self.rows.append((state.t, state.g, state.h, state.sup_u, state.mass, rflux, lflux))

    def column(self, name: str) -> np.ndarray:
        i = SERIES_COLUMNS.index(name)
        return np.array([r[i] for r in self.rows])

    def __len__(self):
        return len(self.rows)

    @property
    def t(self):
        return self.column("t")

    @property
    def g(self):
        return self.column("g")

    @property
    def h(self):
        return self.column("h")

    @property
    def sup_u(self):
        return self.column("sup_u")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(SERIES_COLUMNS) + "\n")
            for r in self.rows:
                fh.write(",".join(repr(float(v)) for v in r) + "\n")


def initial_state(config: SimConfig) -> FrontState:
    dx, h0 = config.dx, config.h0
    m = int(math.ceil(h0 / dx)) - 1
    while (m + 1) * dx < h0:
        m += 1
    while m * dx >= h0:
        m -= 1
    idx = np.arange(-m, m + 1)
    u = np.asarray(config.profile()(idx * dx), dtype=float)
    return FrontState(0.0, -h0, h0, dx, -m, u, 0)


def right_flux(state: FrontState, kernel: Kernel, mu: float) -> float:
    """``mu * int_g^h K(h - x) u(x) dx``, the speed of the right front."""
    if not len(state.u):
        return 0.0
    return max(mu * tail_integral(kernel, state.h, state.nodes, state.values), 0.0)


def left_flux(state: FrontState, kernel: Kernel, mu: float) -> float:
    """Magnitude of the left front speed, ``mu * int_g^h (1 - K(g - x)) u(x) dx``."""
    if not len(state.u):
        return 0.0
    return max(mu * left_tail_integral(kernel, state.g, state.nodes, state.values), 0.0)


@lru_cache(maxsize=64)
def _convolver(kernel: Kernel, dx: float) -> LatticeConvolver:
    return LatticeConvolver(kernel, dx)


def _lattice_range(g: float, h: float, dx: float):
    """First and last lattice index strictly inside ``(g, h)``."""
    lo = int(math.floor(g / dx)) + 1
    while (lo - 1) * dx > g:
        lo -= 1
    while lo * dx <= g:
        lo += 1
    hi = int(math.ceil(h / dx)) - 1
    while (hi + 1) * dx < h:
        hi += 1
    while hi * dx >= h:
        hi -= 1
    return lo, hi


def _ext_rhs(state: FrontState, cfg: SimConfig, lo: int, hi: int):
    """``d J*u - d u + f(u)`` and ``J*u`` on lattice indices ``lo..hi``."""
    n = len(state.u)
    i1 = state.i0 + n - 1
    pad = max(state.i0 - lo, hi - i1, 0)
    conv = _convolver(cfg.kernel, state.dx).convolve(state.i0, state.u, state.g, state.h, pad)
    np.maximum(conv, 0.0, out=conv)
    start = state.i0 - pad
    conv = conv[lo - start : hi - start + 1]
    u = np.zeros(hi - lo + 1)
    a, b = max(lo, state.i0), min(hi, i1)
    if b >= a:
        u[a - lo : b - lo + 1] = state.u[a - state.i0 : b - state.i0 + 1]
    rhs = cfg.d * conv - cfg.d * u + cfg.reaction.f(u)
    return rhs, conv, u


def _entry_fraction(x, front_old, front_new):
    """Fraction of the step left after the front crosses ``x``."""
    span = front_new - front_old
    if span == 0.0:
        return np.zeros_like(x)
    return np.clip((front_new - x) / span, 0.0, 1.0)


def _euler(state: FrontState, cfg: SimConfig, R: float, L: float) -> FrontState:
    dt = cfg.dt
    h_new = state.h + dt * R
    g_new = state.g - dt * L
    lo, hi = _lattice_range(g_new, h_new, state.dx)
    rhs, conv, u = _ext_rhs(state, cfg, lo, hi)
    new = u + dt * rhs
    n = len(state.u)
    i1 = state.i0 + n - 1
    x = (lo + np.arange(hi - lo + 1)) * state.dx
    left = slice(0, max(state.i0 - lo, 0))
    right = slice(hi - lo + 1 - max(hi - i1, 0), hi - lo + 1)
    new[left] = _entry_fraction(x[left], state.g, g_new) * dt * cfg.d * conv[left]
    new[right] = _entry_fraction(x[right], state.h, h_new) * dt * cfg.d * conv[right]
    return FrontState(state.t + dt, g_new, h_new, state.dx, lo, new, state.steps + 1)


def _picard(state: FrontState, pred: FrontState, cfg: SimConfig, R: float, L: float) -> FrontState:
    # one sweep of the implicit trapezoidal step, linearized about ``pred``
    dt = cfg.dt
    Rp = right_flux(pred, cfg.kernel, cfg.mu)
    Lp = left_flux(pred, cfg.kernel, cfg.mu)
    h_new = state.h + 0.5 * dt * (R + Rp)
    g_new = state.g - 0.5 * dt * (L + Lp)
    lo, hi = _lattice_range(g_new, h_new, state.dx)
    rhs_s, _, u = _ext_rhs(state, cfg, lo, hi)
    rhs_p, _, _ = _ext_rhs(pred, cfg, lo, hi)
    avg = 0.5 * (rhs_s + rhs_p)
    new = u + dt * avg
    i1 = state.i0 + len(state.u) - 1
    x = (lo + np.arange(hi - lo + 1)) * state.dx
    left = slice(0, max(state.i0 - lo, 0))
    right = slice(hi - lo + 1 - max(hi - i1, 0), hi - lo + 1)
    new[left] = _entry_fraction(x[left], state.g, g_new) * dt * avg[left]
    new[right] = _entry_fraction(x[right], state.h, h_new) * dt * avg[right]
    np.maximum(new, 0.0, out=new)
    return FrontState(state.t + dt, g_new, h_new, state.dx, lo, new, state.steps + 1)


def _advance(state: FrontState, cfg: SimConfig, R: float, L: float, bound: float) -> FrontState:
    new = _euler(state, cfg, R, L)
    for _ in range(cfg.picard_iters):
        new = _picard(state, new, cfg, R, L)
    # time is an exact multiple of dt so checkpointed runs resume bitwise
    new.t = new.steps * cfg.dt
    if len(new.u) and new.u.max() > bound * (1.0 + 1e-9) + 1e-12:
        raise BlowUp(f"sup u = {new.u.max():.6g} exceeds the invariant bound {bound:.6g} at t={new.t:g}")
    return new


def _coarsen(state: FrontState) -> FrontState:
    keep = (state.i0 + np.arange(len(state.u))) % 2 == 0
    i0 = state.i0 + int(np.argmax(keep))
    return FrontState(state.t, state.g, state.h, 2.0 * state.dx, i0 // 2, state.u[keep].copy(), state.steps)


def step(state: FrontState, config: SimConfig) -> FrontState:
    """Advance ``state`` by one time step ``config.dt``."""
    if config.dt * (config.d + config.reaction.lipschitz(config.upper_bound())) >= 1.0:
        raise StabilityViolation("dt*(d + Lip f) >= 1 breaks positivity")
    R = right_flux(state, config.kernel, config.mu)
    L = left_flux(state, config.kernel, config.mu)
    return _advance(state, config, R, L, config.upper_bound())


def classify_outcome(series: TimeSeries, ell_star_value: float, thresholds: Thresholds = Thresholds()) -> Outcome:
    """Spreading, Vanishing or Undecided from a (partial) time series."""
    if not len(series):
        return Outcome.UNDECIDED
    last = series.rows[-1]
    t_end, g_end, h_end, sup_end = last[0], last[1], last[2], last[3]
    length = h_end - g_end
    margin = thresholds.margin_frac * ell_star_value
    if length > ell_star_value + margin:
        return Outcome.SPREADING
    if sup_end < thresholds.eps_vanish and t_end > 0:
        t = series.t
        lengths = series.h - series.g
        k = int(np.searchsorted(t, (1.0 - thresholds.stall_window) * t_end, side="left"))
        k = min(k, len(t) - 1)
        if k < len(t) - 1:
            growth = (lengths[-1] - lengths[k]) / lengths[k]
            if growth < thresholds.stall_rel:
                return Outcome.VANISHING
    return Outcome.UNDECIDED


def run(
    config: SimConfig,
    state: Optional[FrontState] = None,
    series: Optional[TimeSeries] = None,
    stop_time: Optional[float] = None,
):
    """Integrate to ``T_max`` (or ``stop_time``), or until classification fires.

    Passing a previous ``state`` and ``series`` continues that run; the
    continuation is bitwise identical to an uninterrupted run.

    Returns
    -------
    (TimeSeries, FrontState)
    """
    config.validate()
    bound = config.upper_bound()
    if state is None:
        state = initial_state(config)
        series = TimeSeries()
        R = right_flux(state, config.kernel, config.mu)
        L = left_flux(state, config.kernel, config.mu)
        series.append(state, R, L)
    else:
        series = series if series is not None else TimeSeries()
        R = right_flux(state, config.kernel, config.mu)
        L = left_flux(state, config.kernel, config.mu)
    total = int(round(config.T_max / config.dt))
    last = total if stop_time is None else min(total, int(round(stop_time / config.dt)))
    while state.steps < last:
        state = _advance(state, config, R, L, bound)
        if config.max_nodes is not None and len(state.u) > config.max_nodes:
            state = _coarsen(state)
        R = right_flux(state, config.kernel, config.mu)
        L = left_flux(state, config.kernel, config.mu)
        if state.steps % config.record_every == 0 or state.steps == total:
            series.append(state, R, L)
            if config.stop_on_decision:
                if classify_outcome(series, config.ell_star, config.thresholds) is not Outcome.UNDECIDED:
                    break
    return series, state


def _probe(template: SimConfig, mu: float) -> Outcome:
    cfg = replace(template, mu=mu, stop_on_decision=True)
    series, _ = run(cfg)
    outcome = classify_outcome(series, cfg.ell_star, cfg.thresholds)
    if outcome is Outcome.UNDECIDED:
        raise UndecidedBudget(f"mu={mu:g} still undecided at T_max={cfg.T_max:g}; raise T_max")
    return outcome


def mu_star(
    config_template: SimConfig,
    mu_bracket,
    tol: float = 1e-2,
    workers: int = 1,
    trace: Optional[list] = None,
) -> float:
    """Critical expansion coefficient separating vanishing from spreading.

    Bisection on ``mu``; each probe runs until :func:`classify_outcome`
    decides.  Stops when the bracket width is below ``tol * mu``.
    """
    if config_template.ell_star is None:
        raise InvalidParameter("mu_star needs ell_star in the config template")
    if not config_template.reaction.f0 < config_template.d:
        raise InvalidParameter("mu_star requires d > f'(0)")
    if not config_template.h0 < 0.5 * config_template.ell_star:
        raise InvalidParameter("mu_star requires h0 < ell_star / 2")
    lo, hi = (float(v) for v in mu_bracket)
    if not (0 < lo < hi):
        raise BracketInvalid(f"bracket ({lo:g}, {hi:g}) must satisfy 0 < lo < hi")
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        out_lo, out_hi = pool.map(lambda m: _probe(config_template, m), (lo, hi))
    if trace is not None:
        trace.extend([(lo, out_lo.value), (hi, out_hi.value)])
    if not (out_lo is Outcome.VANISHING and out_hi is Outcome.SPREADING):
        raise BracketInvalid(f"bracket ends classify as {out_lo.value} and {out_hi.value}")
    while hi - lo > tol * 0.5 * (lo + hi):
        mid = 0.5 * (lo + hi)
        out = _probe(config_template, mid)
        if trace is not None:
            trace.append((mid, out.value))
        if out is Outcome.SPREADING:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
