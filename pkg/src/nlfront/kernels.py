"""Dispersal kernels and their tail functionals.

A kernel ``J`` is a probability density on the real line.  Besides point
evaluation, everything downstream works with three antiderivatives of the
tail function ``K(z) = int_z^inf J``:

    K(z)                 right tail mass
    F(z) = int_0^z K     (any sign of z)
    G(z) = int_0^z F

With ``F`` and ``G`` available, integrals of ``J`` or ``K`` against
piecewise-linear densities are exact sums of boundary terms, which is how
the convolution and flux quadratures in this package are built.

All parametric families are symmetric about ``shift``; asymmetric kernels
come from ``shift != 0``, from tabulated samples, or from :func:`reflect`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
from scipy import special

from .errors import InvalidParameter, NormalizationFailure, QuadratureOverflow

__all__ = [
    "FAMILIES",
    "KernelSpec",
    "TailClass",
    "Kernel",
    "CStar",
    "make_kernel",
    "reflect",
    "c_star",
    "flux_moment",
    "read_tabulated_kernel",
]

FAMILIES = (
    "uniform",
    "triangular",
    "gaussian",
    "laplace",
    "compact_bump",
    "power_tail",
    "log_tail",
    "tabulated",
)

_REQUIRED = {
    "uniform": ("a",),
    "triangular": ("a",),
    "gaussian": ("s",),
    "laplace": ("b",),
    "compact_bump": ("a",),
    "power_tail": ("alpha", "lam"),
    "log_tail": ("beta", "lam"),
    "tabulated": (),
}

_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)
# exp() overflows near 709; keep the moment generating function well below
_EXP_CAP = 600.0


@dataclass(frozen=True)
class KernelSpec:
    """Declarative kernel description.

    ``params`` holds the family parameters by name (``a``, ``s``, ``b``,
    ``alpha``, ``beta``, ``lam``); ``samples`` is an ``(x, J)`` pair for the
    tabulated family.
    """

    family: str
    params: Mapping[str, float] = field(default_factory=dict)
    shift: float = 0.0
    samples: Optional[tuple] = None
    reflected: bool = False

    def describe(self) -> str:
        parts = ", ".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
        text = f"{self.family}({parts})"
        if self.shift:
            text += f" shift={self.shift:g}"
        if self.reflected:
            text += " reflected"
        return text


@dataclass(frozen=True)
class TailClass:
    thin_plus: bool
    thin_minus: bool
    j1_plus: bool
    j1_minus: bool
    heavy: Optional[tuple] = None
    log_heavy: Optional[tuple] = None

    def swapped(self) -> "TailClass":
        return TailClass(
            thin_plus=self.thin_minus,
            thin_minus=self.thin_plus,
            j1_plus=self.j1_minus,
            j1_minus=self.j1_plus,
            heavy=self.heavy,
            log_heavy=self.log_heavy,
        )


# ---------------------------------------------------------------------------
# symmetric base profiles, described on s >= 0
# ---------------------------------------------------------------------------


class _Profile:
    """Symmetric density centred at 0, described on the half line.

    Subclasses provide ``j``, ``k``, ``k1``, ``k2`` on ``s >= 0`` where
    ``k(s) = int_s^inf j``, ``k1 = int_0^s k`` and ``k2 = int_0^s k1``.
    """

    radius = math.inf  # support radius
    m1 = math.inf  # int_0^inf k = int_0^inf s j(s) ds
    table_limit = math.inf
    breakpoints: tuple = ()

    def j(self, s):
        raise NotImplementedError

    def k(self, s):
        raise NotImplementedError

    def k1(self, s):
        raise NotImplementedError

    def k2(self, s):
        raise NotImplementedError

    def mgf(self, nu: float) -> float:
        raise NotImplementedError

    def nu_max(self) -> float:
        return _EXP_CAP / self.radius if math.isfinite(self.radius) else 0.0

    @property
    def jmax(self) -> float:
        return float(self.j(np.zeros(1))[0])


class _Uniform(_Profile):
    def __init__(self, a):
        self.a = a
        self.radius = a
        self.m1 = a / 4.0
        self.breakpoints = (a,)

    def j(self, s):
        return np.where(s <= self.a, 0.5 / self.a, 0.0)

    def k(self, s):
        a = self.a
        return np.where(s < a, (a - s) / (2 * a), 0.0)

    def k1(self, s):
        a = self.a
        sc = np.minimum(s, a)
        return (a * sc - 0.5 * sc * sc) / (2 * a)

    def k2(self, s):
        a = self.a
        sc = np.minimum(s, a)
        inner = (0.5 * a * sc**2 - sc**3 / 6.0) / (2 * a)
        return inner + 0.25 * a * np.maximum(s - a, 0.0)

    def mgf(self, nu):
        x = nu * self.a
        if x == 0.0:
            return 1.0
        return math.sinh(x) / x


class _Triangular(_Profile):
    def __init__(self, a):
        self.a = a
        self.radius = a
        self.m1 = a / 6.0
        self.breakpoints = (0.0, a)

    def j(self, s):
        a = self.a
        return np.where(s < a, (a - s) / a**2, 0.0)

    def k(self, s):
        a = self.a
        r = np.maximum(a - s, 0.0)
        return r * r / (2 * a * a)

    def k1(self, s):
        a = self.a
        r = np.maximum(a - s, 0.0)
        return (a**3 - r**3) / (6 * a * a)

    def k2(self, s):
        a = self.a
        sc = np.minimum(s, a)
        r = a - sc
        inner = (a**3 * sc - (a**4 - r**4) / 4.0) / (6 * a * a)
        return inner + (a / 6.0) * np.maximum(s - a, 0.0)

    def mgf(self, nu):
        x = nu * self.a
        if abs(x) < 1e-4:
            return 1.0 + x * x / 12.0
        return 2.0 * (math.cosh(x) - 1.0) / (x * x)


class _Gaussian(_Profile):
    def __init__(self, sigma):
        self.sigma = sigma
        self.b = sigma * math.sqrt(2.0)
        self.m1 = sigma / math.sqrt(2 * math.pi)
        # support is unbounded but the density underflows beyond ~40 sigma
        self.radius = math.inf

    def j(self, s):
        return np.exp(-0.5 * (s / self.sigma) ** 2) / (self.sigma * math.sqrt(2 * math.pi))

    def k(self, s):
        return 0.5 * special.erfc(s / self.b)

    def k1(self, s):
        b = self.b
        return 0.5 * (s * special.erfc(s / b) + b / math.sqrt(math.pi) * (-np.expm1(-(s / b) ** 2)))

    def k2(self, s):
        b = self.b
        e = np.exp(-(s / b) ** 2)
        ierfc = 0.5 * ((s * s - 0.5 * b * b) * special.erfc(s / b) - b * s / math.sqrt(math.pi) * e + 0.5 * b * b)
        rest = s - 0.5 * b * math.sqrt(math.pi) * special.erf(s / b)
        return 0.5 * (ierfc + b / math.sqrt(math.pi) * rest)

    def mgf(self, nu):
        return math.exp(0.5 * (self.sigma * nu) ** 2)

    def nu_max(self):
        return math.sqrt(2 * _EXP_CAP) / self.sigma


class _Laplace(_Profile):
    def __init__(self, b):
        self.b = b
        self.m1 = b / 2.0

    def j(self, s):
        return np.exp(-s / self.b) / (2 * self.b)

    def k(self, s):
        return 0.5 * np.exp(-s / self.b)

    def k1(self, s):
        return -0.5 * self.b * np.expm1(-s / self.b)

    def k2(self, s):
        b = self.b
        return 0.5 * (b * s + b * b * np.expm1(-s / b))

    def mgf(self, nu):
        x = (self.b * nu) ** 2
        if x >= 1.0:
            return math.inf
        return 1.0 / (1.0 - x)

    def nu_max(self):
        return (1.0 - 1e-9) / self.b


class _PowerTail(_Profile):
    """``J = lam (rho + |x|)^-alpha`` with ``rho`` fixed by unit mass."""

    def __init__(self, alpha, lam):
        self.alpha = alpha
        self.lam = lam
        self.rho = (2.0 * lam / (alpha - 1.0)) ** (1.0 / (alpha - 1.0))
        if alpha > 2.0:
            self.m1 = lam * self.rho ** (2.0 - alpha) / ((alpha - 1.0) * (alpha - 2.0))

    def j(self, s):
        return self.lam * (self.rho + s) ** (-self.alpha)

    def k(self, s):
        return self.lam * (self.rho + s) ** (1.0 - self.alpha) / (self.alpha - 1.0)

    def k1(self, s):
        a, lam, rho = self.alpha, self.lam, self.rho
        if a == 2.0:
            return lam * np.log1p(s / rho)
        c = lam / ((a - 1.0) * (2.0 - a))
        # (rho+s)^(2-a) - rho^(2-a) written to stay accurate for small s
        return c * rho ** (2.0 - a) * np.expm1((2.0 - a) * np.log1p(s / rho))

    def k2(self, s):
        a, lam, rho = self.alpha, self.lam, self.rho
        lg = np.log1p(s / rho)
        if a == 2.0:
            return lam * ((rho + s) * lg - s)
        if a == 3.0:
            return 0.5 * lam * (s / rho - lg)
        c = lam / ((a - 1.0) * (2.0 - a))
        grow = rho ** (3.0 - a) * np.expm1((3.0 - a) * lg) / (3.0 - a)
        return c * (grow - rho ** (2.0 - a) * s)

    def mgf(self, nu):
        return 1.0 if nu == 0.0 else math.inf


class _Tabulated1D:
    """Taylor-with-integral-remainder evaluation of k, k1, k2 from j."""

    def __init__(self, j: Callable, nodes: np.ndarray, k0: float):
        self._j = j
        self.nodes = np.asarray(nodes, dtype=float)
        n = len(self.nodes)
        kv = np.empty(n)
        k1v = np.empty(n)
        k2v = np.empty(n)
        kv[0], k1v[0], k2v[0] = k0, 0.0, 0.0
        for i in range(n - 1):
            s0, s1 = self.nodes[i], self.nodes[i + 1]
            m0, m1, m2 = self._moments(np.array([s0]), np.array([s1]))
            h = s1 - s0
            kv[i + 1] = kv[i] - m0[0]
            k1v[i + 1] = k1v[i] + h * kv[i] - m1[0]
            k2v[i + 1] = k2v[i] + h * k1v[i] + 0.5 * h * h * kv[i] - m2[0]
        self.kv, self.k1v, self.k2v = kv, k1v, k2v

    def _moments(self, lo, hi):
        # int_lo^hi (hi - t)^p j(t) dt for p = 0, 1, 2 (p-th weights scaled by 1/p!)
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        t = mid[:, None] + half[:, None] * _GL_X[None, :]
        w = half[:, None] * _GL_W[None, :]
        jt = self._j(t)
        r = hi[:, None] - t
        return (w * jt).sum(1), (w * r * jt).sum(1), (w * 0.5 * r * r * jt).sum(1)

    def locate(self, s):
        if np.any(s > self.nodes[-1]):
            raise QuadratureOverflow(
                f"argument {float(np.max(s)):.3g} beyond tabulated tail range {self.nodes[-1]:.3g}"
            )
        i = np.clip(np.searchsorted(self.nodes, s, side="right") - 1, 0, len(self.nodes) - 2)
        return i

    def eval(self, s, order):
        s = np.asarray(s, dtype=float)
        flat = s.ravel()
        i = self.locate(flat)
        s0 = self.nodes[i]
        h = flat - s0
        m0, m1, m2 = self._moments(s0, flat)
        if order == 0:
            out = self.kv[i] - m0
        elif order == 1:
            out = self.k1v[i] + h * self.kv[i] - m1
        else:
            out = self.k2v[i] + h * self.k1v[i] + 0.5 * h * h * self.kv[i] - m2
        return out.reshape(s.shape)


class _CompactBump(_Profile):
    def __init__(self, a):
        self.a = a
        self.radius = a
        nodes = np.linspace(0.0, a, 257)
        self.norm = 1.0
        raw = _Tabulated1D(self._raw, nodes, 0.0)
        # raw.kv[-1] = -int_0^a raw; the half mass must equal 1/2
        self.norm = 0.5 / (-raw.kv[-1])
        self.table = _Tabulated1D(self.j, nodes, 0.5)
        self.m1 = float(self.table.k1v[-1])
        self.breakpoints = (a,)

    def _raw(self, s):
        x = np.clip(np.abs(s) / self.a, 0.0, 1.0)
        with np.errstate(divide="ignore", over="ignore"):
            v = np.exp(-1.0 / (1.0 - x * x))
        return np.where(x < 1.0, v, 0.0)

    def j(self, s):
        return self.norm * self._raw(s)

    def _split(self, s, order):
        s = np.asarray(s, dtype=float)
        inside = np.minimum(s, self.a)
        val = self.table.eval(inside, order)
        extra = np.maximum(s - self.a, 0.0)
        if order == 0:
            return np.where(s >= self.a, 0.0, val)
        if order == 1:
            return val
        return val + self.m1 * extra

    def k(self, s):
        return self._split(s, 0)

    def k1(self, s):
        return self._split(s, 1)

    def k2(self, s):
        return self._split(s, 2)

    def mgf(self, nu):
        t = self.table.nodes
        lo, hi = t[:-1], t[1:]
        half, mid = 0.5 * (hi - lo), 0.5 * (hi + lo)
        x = mid[:, None] + half[:, None] * _GL_X[None, :]
        return float(2.0 * (half[:, None] * _GL_W * self.j(x) * np.cosh(nu * x)).sum())


class _LogTail(_Profile):
    """``J = lam / ((rho+|x|) ln(rho+|x|)^beta)`` with unit mass."""

    def __init__(self, beta, lam, limit=1e15):
        self.beta = beta
        self.lam = lam
        self.rho = math.exp((2.0 * lam / (beta - 1.0)) ** (1.0 / (beta - 1.0)))
        self.table_limit = limit
        core = np.linspace(0.0, 4.0 * self.rho, 65)
        geo = 4.0 * self.rho * np.geomspace(1.0, limit / (4.0 * self.rho), 400)[1:]
        nodes = np.concatenate([core, geo])
        self.table = _Tabulated1D(self.j, nodes, 0.5)

    def j(self, s):
        u = self.rho + s
        return self.lam / (u * np.log(u) ** self.beta)

    def k(self, s):
        s = np.asarray(s, dtype=float)
        return self.lam * np.log(self.rho + s) ** (1.0 - self.beta) / (self.beta - 1.0)

    def k1(self, s):
        return self.table.eval(s, 1)

    def k2(self, s):
        return self.table.eval(s, 2)

    def mgf(self, nu):
        return 1.0 if nu == 0.0 else math.inf


# ---------------------------------------------------------------------------
# full-line kernels
# ---------------------------------------------------------------------------


class Kernel:
    """Immutable dispersal kernel.

    Call the instance to evaluate ``J``; use :meth:`tail`,
    :meth:`tail_int`, :meth:`tail_int2` for ``K``, ``F``, ``G``.
    """

    def __init__(self, spec: KernelSpec, tail_class: TailClass, mass_tol: float = 1e-8):
        self.spec = spec
        self.tail_class = tail_class
        self.mass_tol = mass_tol
        self.trunc_radius = self._find_trunc_radius()

    # subclasses implement -------------------------------------------------
    def __call__(self, x):
        raise NotImplementedError

    def tail(self, z):
        raise NotImplementedError

    def tail_int(self, z):
        raise NotImplementedError

    def tail_int2(self, z):
        raise NotImplementedError

    def mgf(self, nu: float) -> float:
        """``int J(x) exp(nu x) dx`` (``inf`` when it diverges)."""
        raise NotImplementedError

    def nu_max(self) -> float:
        raise NotImplementedError

    def first_moment_plus(self) -> float:
        """``int_0^inf K(z) dz``, the mean positive displacement mass."""
        raise NotImplementedError

    def first_moment_minus(self) -> float:
        raise NotImplementedError

    @property
    def sup(self) -> float:
        raise NotImplementedError

    @property
    def breakpoints(self) -> tuple:
        return ()

    @property
    def support(self) -> tuple:
        """Interval outside of which ``J`` vanishes identically (may be infinite)."""
        return (-math.inf, math.inf)

    @property
    def table_limit(self) -> float:
        return math.inf

    # derived ----------------------------------------------------------------
    def outside_mass(self, r: float) -> float:
        return float(self.tail(np.array([r]))[0] + 1.0 - self.tail(np.array([-r]))[0])

    def _find_trunc_radius(self) -> float:
        lo_sup, hi_sup = self.support
        if math.isfinite(lo_sup) and math.isfinite(hi_sup):
            return max(abs(lo_sup), abs(hi_sup))
        r = 1.0
        for _ in range(200):
            if r > self.table_limit:
                return math.inf
            if self.outside_mass(r) < self.mass_tol:
                break
            r *= 2.0
        else:
            return math.inf
        lo, hi = r / 2.0, r
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if self.outside_mass(mid) < self.mass_tol:
                hi = mid
            else:
                lo = mid
        return hi

    @property
    def core_width(self) -> float:
        """Twice the interquartile range of ``J``; the length scale grids must resolve."""
        def quantile(level):
            lo, hi = -1.0, 1.0
            while self.tail(np.array([lo]))[0] < level:
                lo *= 2.0
            while self.tail(np.array([hi]))[0] > level:
                hi *= 2.0
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if self.tail(np.array([mid]))[0] > level:
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)

        return 2.0 * (quantile(0.25) - quantile(0.75))

    def __repr__(self):
        return f"Kernel({self.spec.describe()})"


class _ProfileKernel(Kernel):
    """Symmetric profile translated by ``shift``."""

    def __init__(self, spec, profile: _Profile, tail_class, mass_tol=1e-8):
        self.profile = profile
        self.shift = float(spec.shift)
        p = profile
        # helpers on the centred full line
        self._f0_shift = float(self._F0(np.array([-self.shift]))[0])
        self._g0_shift = float(self._G0(np.array([-self.shift]))[0])
        super().__init__(spec, tail_class, mass_tol)
        self._sup = p.jmax

    def _K0(self, s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        v = self.profile.k(a)
        return np.where(s >= 0, v, 1.0 - v)

    def _F0(self, s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        v = self.profile.k1(a)
        return np.where(s >= 0, v, s + v)

    def _G0(self, s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        v = self.profile.k2(a)
        return np.where(s >= 0, v, 0.5 * s * s - v)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.profile.j(np.abs(x - self.shift))

    def tail(self, z):
        return self._K0(np.asarray(z, dtype=float) - self.shift)

    def tail_int(self, z):
        z = np.asarray(z, dtype=float)
        return self._F0(z - self.shift) - self._f0_shift

    def tail_int2(self, z):
        z = np.asarray(z, dtype=float)
        return self._G0(z - self.shift) - self._g0_shift - self._f0_shift * z

    def mgf(self, nu):
        m = self.profile.mgf(nu)
        if not math.isfinite(m):
            return math.inf
        return math.exp(nu * self.shift) * m

    def nu_max(self):
        base = self.profile.nu_max()
        if self.shift and base > 0:
            base = min(base, _EXP_CAP / abs(self.shift))
        return base

    def first_moment_plus(self):
        if not self.tail_class.j1_plus:
            return math.inf
        return self.profile.m1 - self._f0_shift

    def first_moment_minus(self):
        if not self.tail_class.j1_minus:
            return math.inf
        return self.profile.m1 - float(self._F0(np.array([self.shift]))[0])

    @property
    def sup(self):
        return self._sup

    @property
    def breakpoints(self):
        pts = set()
        for b in self.profile.breakpoints:
            pts.add(self.shift + b)
            pts.add(self.shift - b)
        return tuple(sorted(pts))

    @property
    def support(self):
        r = self.profile.radius
        return (self.shift - r, self.shift + r)

    @property
    def table_limit(self):
        return self.profile.table_limit - abs(self.shift)


class _TabulatedKernel(Kernel):
    """Piecewise-linear density through the samples, zero outside them."""

    def __init__(self, spec, x, jv, mass_tol=1e-8):
        x = np.asarray(x, dtype=float)
        jv = np.asarray(jv, dtype=float)
        mass = float(np.sum(0.5 * (jv[1:] + jv[:-1]) * np.diff(x)))
        if not mass > 0.0:
            raise NormalizationFailure("tabulated kernel has zero mass")
        self.x = x
        self.jv = jv / mass
        self.slope = np.diff(self.jv) / np.diff(x)
        h = np.diff(x)
        seg_mass = 0.5 * (self.jv[1:] + self.jv[:-1]) * h
        # K at nodes, accumulated from the right end where K = 0
        kv = np.concatenate([np.cumsum(seg_mass[::-1])[::-1], [0.0]])
        kv[0] = 1.0
        self.kv = kv
        # Fa(z) = int_{x0}^z K, Ga(z) = int_{x0}^z Fa
        fa = np.zeros(len(x))
        ga = np.zeros(len(x))
        for i in range(len(x) - 1):
            t = h[i]
            j0, m = self.jv[i], self.slope[i]
            fa[i + 1] = fa[i] + kv[i] * t - j0 * t**2 / 2 - m * t**3 / 6
            ga[i + 1] = ga[i] + fa[i] * t + kv[i] * t**2 / 2 - j0 * t**3 / 6 - m * t**4 / 24
        self.fa, self.ga = fa, ga
        self._fa0 = float(self._Fa(np.array([0.0]))[0])
        self._ga0 = float(self._Ga(np.array([0.0]))[0])
        super().__init__(spec, TailClass(True, True, True, True), mass_tol)

    def _seg(self, z):
        z = np.asarray(z, dtype=float)
        i = np.clip(np.searchsorted(self.x, z, side="right") - 1, 0, len(self.x) - 2)
        return z, i, z - self.x[i]

    def __call__(self, x):
        z, i, t = self._seg(x)
        v = self.jv[i] + self.slope[i] * t
        return np.where((z < self.x[0]) | (z > self.x[-1]), 0.0, np.maximum(v, 0.0))

    def tail(self, z):
        z, i, t = self._seg(z)
        v = self.kv[i] - self.jv[i] * t - self.slope[i] * t * t / 2
        return np.where(z <= self.x[0], 1.0, np.where(z >= self.x[-1], 0.0, v))

    def _Fa(self, z):
        z, i, t = self._seg(z)
        v = self.fa[i] + self.kv[i] * t - self.jv[i] * t**2 / 2 - self.slope[i] * t**3 / 6
        left = z - self.x[0]
        right = self.fa[-1]
        return np.where(z <= self.x[0], left, np.where(z >= self.x[-1], right, v))

    def _Ga(self, z):
        z, i, t = self._seg(z)
        v = (
            self.ga[i]
            + self.fa[i] * t
            + self.kv[i] * t**2 / 2
            - self.jv[i] * t**3 / 6
            - self.slope[i] * t**4 / 24
        )
        left = 0.5 * (z - self.x[0]) ** 2
        right = self.ga[-1] + self.fa[-1] * (z - self.x[-1])
        return np.where(z <= self.x[0], left, np.where(z >= self.x[-1], right, v))

    def tail_int(self, z):
        return self._Fa(z) - self._fa0

    def tail_int2(self, z):
        z = np.asarray(z, dtype=float)
        return self._Ga(z) - self._ga0 - self._fa0 * z

    def mgf(self, nu):
        lo, hi = self.x[:-1], self.x[1:]
        half, mid = 0.5 * (hi - lo), 0.5 * (hi + lo)
        t = mid[:, None] + half[:, None] * _GL_X[None, :]
        return float((half[:, None] * _GL_W * self(t) * np.exp(nu * t)).sum())

    def nu_max(self):
        r = max(abs(self.x[0]), abs(self.x[-1]))
        return _EXP_CAP / r

    def first_moment_plus(self):
        return float(self.fa[-1] - self._fa0)

    def first_moment_minus(self):
        # int_0^inf (1 - K(-z)) dz = lim z + F(-z)
        z = max(abs(self.x[0]), abs(self.x[-1])) + 1.0
        return float(z + self.tail_int(np.array([-z]))[0])

    @property
    def sup(self):
        return float(np.max(self.jv))

    @property
    def breakpoints(self):
        return tuple(float(v) for v in self.x)

    @property
    def support(self):
        return (float(self.x[0]), float(self.x[-1]))


class _ReflectedKernel(Kernel):
    """``x -> J(-x)`` built from the antiderivatives of the original."""

    def __init__(self, inner: Kernel):
        self.inner = inner
        spec = replace(inner.spec, reflected=not inner.spec.reflected)
        super().__init__(spec, inner.tail_class.swapped(), inner.mass_tol)

    def __call__(self, x):
        return self.inner(-np.asarray(x, dtype=float))

    def tail(self, z):
        return 1.0 - self.inner.tail(-np.asarray(z, dtype=float))

    def tail_int(self, z):
        z = np.asarray(z, dtype=float)
        return z + self.inner.tail_int(-z)

    def tail_int2(self, z):
        z = np.asarray(z, dtype=float)
        return 0.5 * z * z - self.inner.tail_int2(-z)

    def mgf(self, nu):
        return self.inner.mgf(-nu)

    def nu_max(self):
        return self.inner.nu_max()

    def first_moment_plus(self):
        return self.inner.first_moment_minus()

    def first_moment_minus(self):
        return self.inner.first_moment_plus()

    @property
    def sup(self):
        return self.inner.sup

    @property
    def breakpoints(self):
        return tuple(sorted(-b for b in self.inner.breakpoints))

    @property
    def support(self):
        lo, hi = self.inner.support
        return (-hi, -lo)

    @property
    def table_limit(self):
        return self.inner.table_limit


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def _check_params(spec: KernelSpec):
    fam = spec.family
    if fam not in FAMILIES:
        raise InvalidParameter(f"unknown kernel family {fam!r}; expected one of {FAMILIES}")
    missing = [p for p in _REQUIRED[fam] if p not in spec.params]
    if missing:
        raise InvalidParameter(f"{fam} kernel requires parameters {missing}")
    p = spec.params
    for name in ("a", "s", "b", "lam"):
        if name in _REQUIRED[fam] and not p[name] > 0:
            raise InvalidParameter(f"{fam}: {name} must be > 0, got {p[name]}")
    if fam == "power_tail" and not p["alpha"] > 1:
        raise InvalidParameter(f"power_tail: alpha must be > 1 for a normalizable kernel, got {p['alpha']}")
    if fam == "log_tail" and not p["beta"] > 1:
        raise InvalidParameter(f"log_tail: beta must be > 1 for a normalizable kernel, got {p['beta']}")
    if not math.isfinite(spec.shift):
        raise InvalidParameter("shift must be finite")


def make_kernel(spec: KernelSpec, mass_tol: float = 1e-8) -> Kernel:
    """Build a :class:`Kernel` from its spec, validating every invariant."""
    _check_params(spec)
    fam, p = spec.family, spec.params
    if fam == "tabulated":
        if spec.samples is None:
            raise InvalidParameter("tabulated kernel requires samples")
        x, jv = (np.asarray(v, dtype=float) for v in spec.samples)
        if x.ndim != 1 or x.shape != jv.shape or len(x) < 2:
            raise InvalidParameter("tabulated kernel needs two equal-length columns")
        if np.any(np.diff(x) <= 0):
            raise InvalidParameter("tabulated kernel abscissae must be strictly increasing")
        if np.any(jv < 0):
            raise InvalidParameter("tabulated kernel values must be nonnegative")
        x = x + spec.shift
        kern = _TabulatedKernel(spec, x, jv, mass_tol)
    else:
        if fam == "uniform":
            prof, tc = _Uniform(p["a"]), TailClass(True, True, True, True)
        elif fam == "triangular":
            prof, tc = _Triangular(p["a"]), TailClass(True, True, True, True)
        elif fam == "gaussian":
            prof, tc = _Gaussian(p["s"]), TailClass(True, True, True, True)
        elif fam == "laplace":
            prof, tc = _Laplace(p["b"]), TailClass(True, True, True, True)
        elif fam == "compact_bump":
            prof, tc = _CompactBump(p["a"]), TailClass(True, True, True, True)
        elif fam == "power_tail":
            a = float(p["alpha"])
            j1 = a > 2.0
            prof = _PowerTail(a, float(p["lam"]))
            tc = TailClass(False, False, j1, j1, heavy=(a, float(p["lam"])))
        else:
            prof = _LogTail(float(p["beta"]), float(p["lam"]))
            tc = TailClass(False, False, False, False, log_heavy=(float(p["beta"]), float(p["lam"])))
        kern = _ProfileKernel(replace(spec, reflected=False), prof, tc, mass_tol)
    if not kern(np.array([0.0]))[0] > 0:
        raise InvalidParameter("kernel must satisfy J(0) > 0")
    if spec.reflected:
        return _ReflectedKernel(kern)
    return kern


def reflect(kernel: Kernel) -> Kernel:
    """Kernel ``x -> J(-x)``; reflecting twice returns the original object."""
    if isinstance(kernel, _ReflectedKernel):
        return kernel.inner
    return _ReflectedKernel(kernel)


@dataclass(frozen=True)
class CStar:
    value: float
    nu: Optional[float] = None

    def __float__(self):
        return self.value


def _golden(fn, lo, hi, tol=1e-12, max_iter=300):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * (abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


def _c_star_right(kernel: Kernel, d: float, f0: float) -> CStar:
    if not kernel.tail_class.thin_plus:
        return CStar(math.inf)
    nu_hi = kernel.nu_max()
    if not nu_hi > 0:
        return CStar(math.inf)

    def quotient(nu):
        m = kernel.mgf(nu)
        if not math.isfinite(m):
            return math.inf
        return (d * m - d + f0) / nu

    grid = np.geomspace(1e-6, nu_hi, 400)
    vals = np.array([quotient(v) for v in grid])
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    nu, val = _golden(quotient, lo, hi)
    if vals[i] < val:
        nu, val = float(grid[i]), float(vals[i])
    return CStar(float(val), float(nu))


def c_star(kernel: Kernel, d: float, f0: float, direction: str = "right") -> CStar:
    """Linear spreading speed of the Cauchy problem in one direction.

    ``right`` returns ``inf_{nu>0} (d*mgf(nu) - d + f0)/nu`` (``+inf`` for
    a fat right tail); ``left`` returns ``sup_{nu<0}`` of the same quotient
    (``-inf`` for a fat left tail).  ``nu`` is the optimizing exponent.
    """
    if not d > 0 or not f0 > 0:
        raise InvalidParameter("c_star requires d > 0 and f0 > 0")
    if direction == "right":
        return _c_star_right(kernel, d, f0)
    if direction == "left":
        r = _c_star_right(reflect(kernel), d, f0)
        return CStar(-r.value, None if r.nu is None else -r.nu)
    raise InvalidParameter(f"direction must be 'right' or 'left', got {direction!r}")


def flux_moment(kernel: Kernel, k: float, delta: float, mode: str = "linear_inner") -> float:
    """Double flux integral ``int_{-k}^{-inner} int_0^inf J(x-y) dy dx``.

    ``inner`` is ``delta*k`` for ``linear_inner`` and ``k**delta`` for
    ``power_inner``.  The inner integral equals ``1 - K(x)``, so the result
    is a difference of the reflected tail antiderivative.
    """
    if not k > 1:
        raise InvalidParameter("flux_moment requires k > 1")
    if not 0.0 <= delta < 1.0:
        raise InvalidParameter("flux_moment requires delta in [0, 1)")
    if mode == "linear_inner":
        inner = delta * k
    elif mode == "power_inner":
        inner = k**delta
    else:
        raise InvalidParameter(f"unknown mode {mode!r}")
    if k > kernel.table_limit:
        raise QuadratureOverflow(f"k={k:g} exceeds the tabulated tail range {kernel.table_limit:g}")
    # int_inner^k (1 - K(-z)) dz = [z + F(-z)]_inner^k
    z = np.array([k, inner])
    vals = z + kernel.tail_int(-z)
    return float(vals[0] - vals[1])


def read_tabulated_kernel(path) -> tuple:
    """Two-column numeric text ``x J(x)`` with strictly increasing ``x``."""
    data = np.loadtxt(path, dtype=float, ndmin=2)
    if data.shape[1] != 2:
        raise InvalidParameter(f"{path}: expected two columns, got {data.shape[1]}")
    return data[:, 0], data[:, 1]


def theory_acceleration(kernel: Kernel, mu: float) -> Optional[dict]:
    """Limit constants for front growth with a fat-tailed symmetric kernel."""
    tc = kernel.tail_class
    if tc.heavy is not None:
        alpha, lam = tc.heavy
        if alpha == 2.0:
            return {"model": "t_log", "C": mu * lam}
        if 1.0 < alpha < 2.0:
            c = (2.0 ** (2.0 - alpha) / (2.0 - alpha) * mu * lam) ** (1.0 / (alpha - 1.0))
            return {"model": "power", "p": 1.0 / (alpha - 1.0), "C": c}
        return None
    if tc.log_heavy is not None:
        beta, lam = tc.log_heavy
        return {"model": "exp_root", "beta": beta, "K": (2.0 * beta * mu * lam / (beta - 1.0)) ** (1.0 / beta)}
    return None


__all__.append("theory_acceleration")
