"""KPP reaction terms.

A :class:`Reaction` wraps ``f`` and ``f'`` and is only constructed after the
KPP hypotheses have been checked on a sample grid of ``(0, 2]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InvalidParameter, NotKPP

__all__ = ["ReactionSpec", "Reaction", "make_reaction", "linearize", "read_tabulated_reaction"]

REACTION_FAMILIES = ("logistic", "cubic_kpp", "tabulated")

_N_SAMPLES = 10_000
_EQ_TOL = 1e-10


@dataclass(frozen=True)
class ReactionSpec:
    """``logistic``: ``r u (1-u)``; ``cubic_kpp``: ``r u (1-u)(1+a u)``;
    ``tabulated``: cubic spline through ``samples = (u, f)``."""

    family: str
    params: Mapping[str, float] = field(default_factory=dict)
    samples: Optional[tuple] = None

    def describe(self) -> str:
        parts = ", ".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
        return f"{self.family}({parts})"


@dataclass(frozen=True)
class Reaction:
    spec: ReactionSpec
    f: Callable
    fprime: Callable
    f0: float
    f1: float
    K0: float

    def __call__(self, u):
        return self.f(u)

    def lipschitz(self, upper: float) -> float:
        """Lipschitz constant of ``f`` on ``[0, upper]`` (sampled)."""
        u = np.linspace(0.0, max(upper, 1e-12), 4001)
        return float(np.max(np.abs(self.fprime(u))))

    def bound(self, u0_sup: float) -> float:
        """Invariant-region bound ``max(sup u0, K0)``."""
        return max(float(u0_sup), self.K0)


def _kpp_violations(f, fprime) -> list:
    problems = []
    u = np.linspace(0.0, 2.0, _N_SAMPLES + 1)[1:]
    f0 = float(fprime(np.array([0.0]))[0])
    f1 = float(fprime(np.array([1.0]))[0])
    if abs(float(f(np.array([0.0]))[0])) > _EQ_TOL:
        problems.append("f(0) != 0")
    if abs(float(f(np.array([1.0]))[0])) > _EQ_TOL:
        problems.append("f(1) != 0")
    if not f0 > 0:
        problems.append(f"f'(0) = {f0:g} is not > 0")
    if not f1 < 0:
        problems.append(f"f'(1) = {f1:g} is not < 0")
    q = f(u) / u
    bad = np.nonzero(np.diff(q) > 1e-12 * np.maximum(1.0, np.abs(q[:-1])))[0]
    if len(bad):
        problems.append(f"f(u)/u increases near u = {u[bad[0]]:.4g}")
    if q[0] > f0 + 1e-6 * max(1.0, abs(f0)):
        problems.append("f(u)/u exceeds f'(0) near 0")
    return problems


def _saturation_level(f) -> float:
    u = np.linspace(0.0, 2.0, _N_SAMPLES + 1)[1:]
    fv = f(u)
    positive = np.nonzero(fv > _EQ_TOL)[0]
    if len(positive) == 0:
        return float(u[0])
    last = positive[-1]
    if last + 1 >= len(u):
        raise NotKPP("f stays positive on (0, 2]; no saturation level K0")
    return float(u[last + 1]) if fv[last + 1] <= 0 else float(u[last])


def make_reaction(spec: ReactionSpec) -> Reaction:
    fam, p = spec.family, spec.params
    if fam == "logistic":
        r = float(p.get("r", 1.0))
        if not r > 0:
            raise InvalidParameter(f"logistic: r must be > 0, got {r}")

        def f(u, r=r):
            return r * u * (1.0 - u)

        def fp(u, r=r):
            return r * (1.0 - 2.0 * u)

    elif fam == "cubic_kpp":
        r = float(p.get("r", 1.0))
        a = float(p.get("a", 0.0))
        if not r > 0:
            raise InvalidParameter(f"cubic_kpp: r must be > 0, got {r}")

        def f(u, r=r, a=a):
            return r * u * (1.0 - u) * (1.0 + a * u)

        def fp(u, r=r, a=a):
            return r * (1.0 + 2.0 * (a - 1.0) * u - 3.0 * a * u * u)

    elif fam == "tabulated":
        if spec.samples is None:
            raise InvalidParameter("tabulated reaction requires samples")
        uu, ff = (np.asarray(v, dtype=float) for v in spec.samples)
        if uu.ndim != 1 or uu.shape != ff.shape or len(uu) < 4:
            raise InvalidParameter("tabulated reaction needs two equal-length columns (>= 4 rows)")
        if np.any(np.diff(uu) <= 0):
            raise InvalidParameter("tabulated reaction abscissae must be strictly increasing")
        if uu[0] > 0 or uu[-1] < 2.0:
            raise InvalidParameter("tabulated reaction must cover [0, 2]")
        spline = CubicSpline(uu, ff)
        dspline = spline.derivative()

        def f(u, s=spline):
            return s(np.asarray(u, dtype=float))

        def fp(u, s=dspline):
            return s(np.asarray(u, dtype=float))

    else:
        raise InvalidParameter(f"unknown reaction family {fam!r}; expected one of {REACTION_FAMILIES}")

    problems = _kpp_violations(f, fp)
    if problems:
        raise NotKPP(f"{spec.describe()} fails KPP checks: " + "; ".join(problems))
    f0 = float(fp(np.array([0.0]))[0])
    f1 = float(fp(np.array([1.0]))[0])
    return Reaction(spec=spec, f=f, fprime=fp, f0=f0, f1=f1, K0=_saturation_level(f))


def linearize(reaction: Reaction) -> float:
    return reaction.f0


def read_tabulated_reaction(path) -> tuple:
    data = np.loadtxt(path, dtype=float, ndmin=2)
    if data.shape[1] != 2:
        raise InvalidParameter(f"{path}: expected two columns, got {data.shape[1]}")
    return data[:, 0], data[:, 1]
