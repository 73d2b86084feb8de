"""Asymptotic observables of free-boundary runs and the comparison harness."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np
from scipy import stats

from .errors import InvalidParameter, ModelMismatch, WindowTooShort
from .free_boundary import FrontState, SimConfig, TimeSeries, initial_profile, initial_state, left_flux, right_flux, _advance

__all__ = [
    "SpeedEstimate",
    "AccelFit",
    "HarnessReport",
    "BulkReport",
    "estimate_speed",
    "fit_acceleration",
    "comparison_harness",
    "bulk_convergence",
]

MIN_SAMPLES = 10
R2_MIN = 0.9


@dataclass(frozen=True)
class SpeedEstimate:
    slope: float
    window: Tuple[float, float]
    stderr: float
    theory: Optional[float] = None
    rel_error: Optional[float] = None


@dataclass(frozen=True)
class AccelFit:
    model: str
    params: dict
    r2: float
    window: Tuple[float, float]


def _window(series: TimeSeries, window_frac: float, window):
    t = series.t
    if window is None:
        if not 0.0 < window_frac <= 0.5:
            raise InvalidParameter("window_frac must lie in (0, 0.5]")
        t_hi = float(t[-1])
        t_lo = (1.0 - window_frac) * t_hi
    else:
        t_lo, t_hi = (float(v) for v in window)
    mask = (t >= t_lo - 1e-9) & (t <= t_hi + 1e-9)
    if int(mask.sum()) < MIN_SAMPLES:
        raise WindowTooShort(f"only {int(mask.sum())} samples in [{t_lo:g}, {t_hi:g}]; need {MIN_SAMPLES}")
    return mask, (t_lo, t_hi)


def estimate_speed(
    series: TimeSeries,
    side: str = "right",
    window_frac: float = 0.5,
    theory: Optional[float] = None,
    window: Optional[Tuple[float, float]] = None,
) -> SpeedEstimate:
    """Least-squares front speed over the trailing window.

    ``side="left"`` measures ``-g``.  ``window`` overrides ``window_frac``.
    """
    if side not in ("right", "left"):
        raise InvalidParameter(f"side must be 'right' or 'left', got {side!r}")
    mask, win = _window(series, window_frac, window)
    pos = series.h if side == "right" else -series.g
    fit = stats.linregress(series.t[mask], pos[mask])
    rel = None if theory is None else abs(fit.slope - theory) / abs(theory)
    return SpeedEstimate(float(fit.slope), win, float(fit.stderr), theory, rel)


def fit_acceleration(
    series: TimeSeries,
    model: str,
    beta: Optional[float] = None,
    window_frac: float = 0.5,
    side: str = "right",
) -> AccelFit:
    """Fit an accelerating front law on the trailing window.

    ``power``: ``h = C t^p`` (``ln h`` against ``ln t``);
    ``t_log``: ``h = C t ln t`` (``h`` against ``t ln t`` through 0);
    ``exp_root``: ``h = exp(K t^(1/beta))`` (``ln h`` against ``t^(1/beta)``).
    """
    mask, win = _window(series, window_frac, None)
    t = series.t[mask]
    h = (series.h if side == "right" else -series.g)[mask]
    if np.any(t <= 0) or np.any(h <= 0):
        raise InvalidParameter("acceleration fits need positive t and front position")
    if model == "power":
        fit = stats.linregress(np.log(t), np.log(h))
        params = {"p": float(fit.slope), "C": float(math.exp(fit.intercept))}
        r2 = fit.rvalue**2
    elif model == "t_log":
        if np.any(t <= 1):
            raise InvalidParameter("t_log fit needs t > 1 on the window")
        s = t * np.log(t)
        C = float(np.dot(s, h) / np.dot(s, s))
        resid = h - C * s
        r2 = 1.0 - float(np.dot(resid, resid)) / float(np.sum((h - h.mean()) ** 2))
        params = {"C": C, "trailing_mean": float(np.mean(h / s))}
    elif model == "exp_root":
        if beta is None or not beta > 1:
            raise InvalidParameter("exp_root fit needs beta > 1")
        fit = stats.linregress(t ** (1.0 / beta), np.log(h))
        params = {"K": float(fit.slope), "beta": float(beta), "intercept": float(fit.intercept)}
        r2 = fit.rvalue**2
    else:
        raise InvalidParameter(f"unknown model {model!r}")
    if r2 < R2_MIN:
        raise ModelMismatch(f"{model} fit has R^2 = {r2:.3f} < {R2_MIN}")
    return AccelFit(model, params, float(r2), win)


# ---------------------------------------------------------------------------
# comparison harness
# ---------------------------------------------------------------------------


@dataclass
class HarnessReport:
    pairs: int
    comparisons: int = 0
    violations: List[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _ordered_pair(base: SimConfig, rng) -> Tuple[SimConfig, SimConfig, dict]:
    amp = min(base.u0_amplitude, 1.0)
    shape = base.u0 if isinstance(base.u0, str) else "cosine"
    hi = replace(base, u0=shape, u0_amplitude=amp)
    s_u = float(rng.uniform(0.5, 1.0))
    s_mu = float(rng.uniform(0.5, 1.0))
    s_h = float(rng.uniform(0.75, 1.0))
    h0_lo = max(base.h0 * s_h, 2.0 * base.dx)
    lo = replace(hi, h0=h0_lo, u0_amplitude=amp * s_u, mu=base.mu * s_mu)
    return lo, hi, {"u0_scale": s_u, "mu_scale": s_mu, "h0_scale": s_h}


def _state_violations(lo: FrontState, hi: FrontState, tol: float):
    out = []
    if lo.h > hi.h + tol:
        out.append(("h", lo.h - hi.h, None))
    if lo.g < hi.g - tol:
        out.append(("g", hi.g - lo.g, None))
    a, b = max(lo.i0, hi.i0), min(lo.i0 + len(lo.u), hi.i0 + len(hi.u)) - 1
    if b >= a:
        ul = lo.u[a - lo.i0 : b - lo.i0 + 1]
        uh = hi.u[a - hi.i0 : b - hi.i0 + 1]
        k = int(np.argmax(ul - uh))
        if ul[k] - uh[k] > tol:
            out.append(("u", float(ul[k] - uh[k]), (a + k) * lo.dx))
    # nodes of the lower solution outside the upper support break the ordering too
    if lo.i0 < hi.i0 or lo.i0 + len(lo.u) > hi.i0 + len(hi.u):
        out.append(("support", 0.0, None))
    return out


def comparison_harness(
    base_config: SimConfig,
    n_pairs: int = 20,
    seed: int = 0,
    T: Optional[float] = None,
    tol: float = 1e-12,
) -> HarnessReport:
    """Run randomized ordered pairs and check that the ordering persists.

    Each pair has ``u0`` scaled by a factor in ``[0.5, 1]``, ``mu`` scaled
    by ``[0.5, 1]`` and ``h0`` by ``[0.75, 1]`` for the lower member.  At
    every step the fronts, the density on common nodes, positivity and the
    invariant bound are checked; ``tol`` absorbs floating-point noise.
    """
    rng = np.random.default_rng(seed)
    report = HarnessReport(pairs=n_pairs)
    horizon = base_config.T_max if T is None else T
    for p in range(n_pairs):
        lo_cfg, hi_cfg, info = _ordered_pair(base_config, rng)
        lo_cfg.validate()
        hi_cfg.validate()
        states = [initial_state(lo_cfg), initial_state(hi_cfg)]
        bounds = [lo_cfg.upper_bound(), hi_cfg.upper_bound()]
        steps = int(round(horizon / base_config.dt))
        for k in range(steps + 1):
            report.comparisons += 1
            for kind, amount, where in _state_violations(states[0], states[1], tol):
                report.violations.append({"pair": p, "t": states[0].t, "kind": kind, "amount": amount, "x": where, **info})
            for s, b, name in zip(states, bounds, ("lower", "upper")):
                if len(s.u) and (s.u.min() < 0 or s.u.max() > b * (1 + 1e-9)):
                    report.violations.append({"pair": p, "t": s.t, "kind": f"bound:{name}", "amount": float(s.u.max()), "x": None, **info})
            if k == steps:
                break
            new = []
            for s, cfg, b in zip(states, (lo_cfg, hi_cfg), bounds):
                R = right_flux(s, cfg.kernel, cfg.mu)
                L = left_flux(s, cfg.kernel, cfg.mu)
                new.append(_advance(s, cfg, R, L, b))
            states = new
    return report


# ---------------------------------------------------------------------------
# bulk convergence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BulkReport:
    applicable: bool
    region: Optional[Tuple[float, float]] = None
    sup_deviation: Optional[float] = None
    reason: str = ""


def bulk_convergence(
    state: FrontState,
    speed_region: Optional[Tuple[float, float]] = None,
    eps: Optional[float] = None,
    level: float = 1.0,
    vanish_level: float = 1e-4,
) -> BulkReport:
    """``sup |u - level|`` over the bulk of a spreading solution.

    Either ``speed_region = (a, b)`` selects ``[a t, b t]`` (finite speeds)
    or ``eps`` selects ``[(1-eps) g, (1-eps) h]`` (accelerating fronts).
    Vanishing solutions return a skip report.
    """
    if (speed_region is None) == (eps is None):
        raise InvalidParameter("give exactly one of speed_region or eps")
    if state.sup_u < vanish_level:
        return BulkReport(False, reason="solution is vanishing")
    if speed_region is not None:
        a, b = speed_region
        lo, hi = a * state.t, b * state.t
    else:
        lo, hi = (1.0 - eps) * state.g, (1.0 - eps) * state.h
    if not (state.g <= lo < hi <= state.h):
        raise InvalidParameter(f"bulk region [{lo:g}, {hi:g}] is not inside [g, h]")
    x = state.interior
    mask = (x >= lo) & (x <= hi)
    if not mask.any():
        return BulkReport(False, (lo, hi), reason="no nodes in region")
    return BulkReport(True, (lo, hi), float(np.max(np.abs(state.u[mask] - level))))
