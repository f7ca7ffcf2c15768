"""Catalog of two-scale test problems and numerical assumption probes.

Every problem has the form

    v' + g(u, v) = f(t)
    D^alpha u = eps * R(t, u, v)
    v(0) = v0, u(0) = u0

The kernels ``g``, ``R``, ``f`` and ``dg_dv`` are numba-jitted scalar
functions.  Exact solutions, when known, are plain numpy functions; the slow
one is stored as a polynomial so its Caputo derivative can be taken
analytically.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numba
import numpy as np
from numpy.polynomial import Polynomial

from .exceptions import ProbeError
from .fast import FastField, _finite_difference_dv, as_kernel
from .fractional import FractionalOrder, caputo_analytic

__all__ = [
    "CoupledProblem",
    "AssumptionReport",
    "example1",
    "example2",
    "example3",
    "example4",
    "get_problem",
    "PROBLEMS",
    "residuals",
    "assumption_probe",
]


@dataclass(frozen=True, eq=False)
class CoupledProblem:
    name: str
    g: object
    R: object
    f: object
    u0: float
    v0: float
    alpha: FractionalOrder
    eps: float
    horizon: float
    period: float = 1.0
    dg_dv: object = None
    exact_u: Polynomial | None = None
    exact_v: object = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "alpha", FractionalOrder(self.alpha))
        for fn in ("g", "R", "f", "dg_dv"):
            object.__setattr__(self, fn, as_kernel(getattr(self, fn)))
        if self.dg_dv is None:
            object.__setattr__(self, "dg_dv", _finite_difference_dv(self.g))
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps!r}")
        if self.eps > 1e-2:
            warnings.warn(f"eps={self.eps!r} is not small; the multiscale "
                          "approximation assumes eps << 1", stacklevel=3)
        if not self.period > 0:
            raise ValueError("period must be positive")
        if not self.horizon >= self.period:
            raise ValueError(f"horizon {self.horizon!r} is shorter than one "
                             f"period {self.period!r}")
        if self.exact_u is not None and abs(self.exact_u(0.0) - self.u0) > 1e-12:
            raise ValueError("exact_u(0) does not match u0")
        if self.exact_v is not None and abs(self.exact_v(0.0) - self.v0) > 1e-12:
            raise ValueError("exact_v(0) does not match v0")

    @property
    def has_exact(self) -> bool:
        return self.exact_u is not None and self.exact_v is not None

    @property
    def fast_field(self) -> FastField:
        return FastField(self.g, self.f, self.period, self.dg_dv)


# --- catalog ----------------------------------------------------------------

@lru_cache(maxsize=None)
def example1(alpha=0.6, eps=5e-5, horizon=6.0) -> CoupledProblem:
    """Local test on one six-unit period: g = u sin v + 2v + 1.

    Exact pair v = 6t - t^2, u = eps*Gamma(3-a)/2 t^2 + eps*Gamma(2-a) t + 1/2.
    """
    alpha = float(FractionalOrder(alpha))
    c2 = eps * math.gamma(3.0 - alpha) / 2.0
    c1 = eps * math.gamma(2.0 - alpha)

    @numba.njit
    def g(u, v):
        return u * math.sin(v) + 2.0 * v + 1.0

    @numba.njit
    def dg_dv(u, v):
        return u * math.cos(v) + 2.0

    @numba.njit
    def f(t):
        ue = c2 * t * t + c1 * t + 0.5
        return -2.0 * t * t + 10.0 * t + 7.0 + ue * math.sin(-t * t + 6.0 * t)

    @numba.njit
    def R(t, u, v):
        ue = c2 * t * t + c1 * t + 0.5
        return t ** (2.0 - alpha) + t ** (1.0 - alpha) + u * v - (-t * t + 6.0 * t) * ue

    def exact_v(t):
        t = np.asarray(t)
        return -t * t + 6.0 * t

    return CoupledProblem("example1", g, R, f, u0=0.5, v0=0.0, alpha=alpha, eps=eps,
                          horizon=horizon, period=6.0, dg_dv=dg_dv,
                          exact_u=Polynomial([0.5, c1, c2]), exact_v=exact_v,
                          params={"alpha": alpha, "eps": eps, "horizon": horizon})


@lru_cache(maxsize=None)
def example2(alpha=0.4, eps=5e-5, horizon=10001.0, printed_forcing=False) -> CoupledProblem:
    """Linear fast equation g = (u + 1) v with a drifting sinusoidal response.

    Exact pair v = t sin(2 pi t) + 2, u = eps*Gamma(3-a)/2 t^2 + 1.

    The exact pair needs eps*Gamma(3-a)/2 in the t^2 coefficient of the
    forcing.  ``printed_forcing=True`` swaps in eps*Gamma(2-a)/2 there; with
    that variant the exact pair no longer solves the fast equation.
    """
    alpha = float(FractionalOrder(alpha))
    c2 = eps * math.gamma(3.0 - alpha) / 2.0
    cf = eps * math.gamma(2.0 - alpha) / 2.0 if printed_forcing else c2
    two_pi = 2.0 * math.pi

    @numba.njit
    def g(u, v):
        return (u + 1.0) * v

    @numba.njit
    def dg_dv(u, v):
        return u + 1.0

    @numba.njit
    def f(t):
        s = math.sin(two_pi * t)
        return s + two_pi * t * math.cos(two_pi * t) + (cf * t * t + 2.0) * (t * s + 2.0)

    @numba.njit
    def R(t, u, v):
        return (t ** (2.0 - alpha)
                + (c2 * t * t + 1.0) * (t * math.sin(two_pi * t) + 2.0) / (u * v) - 1.0)

    def exact_v(t):
        t = np.asarray(t)
        return t * np.sin(two_pi * t) + 2.0

    return CoupledProblem("example2", g, R, f, u0=1.0, v0=2.0, alpha=alpha, eps=eps,
                          horizon=horizon, period=1.0, dg_dv=dg_dv,
                          exact_u=Polynomial([1.0, 0.0, c2]), exact_v=exact_v,
                          params={"alpha": alpha, "eps": eps, "horizon": horizon,
                                  "printed_forcing": printed_forcing})


@lru_cache(maxsize=None)
def example3(alpha=0.8, eps=5e-5, horizon=8001.0) -> CoupledProblem:
    """Two coupled Riccati equations, g = u v^2 + u v.

    Exact pair v = t sin^2(pi t) + 1, u = eps*Gamma(2-a) t + 1.
    """
    alpha = float(FractionalOrder(alpha))
    c1 = eps * math.gamma(2.0 - alpha)
    pi = math.pi

    @numba.njit
    def g(u, v):
        return u * v * v + u * v

    @numba.njit
    def dg_dv(u, v):
        return u * (2.0 * v + 1.0)

    @numba.njit
    def f(t):
        s2 = math.sin(pi * t) ** 2
        ue = c1 * t + 1.0
        ve = t * s2 + 1.0
        return s2 + pi * t * math.sin(2.0 * pi * t) + ue * ve * ve + ue * ve

    @numba.njit
    def R(t, u, v):
        ue = c1 * t + 1.0
        return -v * u * u + (t * math.sin(pi * t) ** 2 + 1.0) * ue * ue + t ** (1.0 - alpha)

    def exact_v(t):
        t = np.asarray(t)
        return t * np.sin(pi * t) ** 2 + 1.0

    return CoupledProblem("example3", g, R, f, u0=1.0, v0=1.0, alpha=alpha, eps=eps,
                          horizon=horizon, period=1.0, dg_dv=dg_dv,
                          exact_u=Polynomial([1.0, c1]), exact_v=exact_v,
                          params={"alpha": alpha, "eps": eps, "horizon": horizon})


@lru_cache(maxsize=None)
def example4(alpha=0.6, eps=5e-5, horizon=10000.0) -> CoupledProblem:
    """g = u^2 v^2, f = t^(1/4) sin(2 pi t) + 5, R = v u^2; no exact solution."""
    alpha = float(FractionalOrder(alpha))
    two_pi = 2.0 * math.pi

    @numba.njit
    def g(u, v):
        return u * u * v * v

    @numba.njit
    def dg_dv(u, v):
        return 2.0 * u * u * v

    @numba.njit
    def f(t):
        return t ** 0.25 * math.sin(two_pi * t) + 5.0

    @numba.njit
    def R(t, u, v):
        return v * u * u

    return CoupledProblem("example4", g, R, f, u0=0.5, v0=1.0, alpha=alpha, eps=eps,
                          horizon=horizon, period=1.0, dg_dv=dg_dv,
                          params={"alpha": alpha, "eps": eps, "horizon": horizon})


PROBLEMS = {
    "example1": example1,
    "example2": example2,
    "example3": example3,
    "example4": example4,
}


def get_problem(name: str, *, alpha=None, eps=None, horizon=None) -> CoupledProblem:
    """Look up a catalog problem by name, applying parameter overrides."""
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    kwargs = {k: float(v) for k, v in
              (("alpha", alpha), ("eps", eps), ("horizon", horizon)) if v is not None}
    return factory(**kwargs)


# --- diagnostics --------------------------------------------------------------

def _complex_step(fn, t, h=1e-20):
    return np.imag(fn(np.asarray(t, dtype=float) + 1j * h)) / h


def residuals(problem: CoupledProblem, times) -> tuple[np.ndarray, np.ndarray]:
    """Residuals of both governing equations at the exact solution.

    Returns (fast, slow) with fast = v' + g(u, v) - f(t) and
    slow = D^alpha u - eps R(t, u, v).  v' is taken by complex-step
    differentiation and D^alpha u analytically from the polynomial.
    """
    if not problem.has_exact:
        raise ValueError(f"{problem.name} has no exact solution")
    t = np.asarray(times, dtype=float)
    coef = np.zeros(3)
    c = problem.exact_u.coef
    if len(c) > 3:
        raise ValueError("exact slow solutions of degree > 2 are not supported")
    coef[:len(c)] = c
    d_alpha_u = (coef[1] * caputo_analytic(1, problem.alpha, t)
                 + coef[2] * caputo_analytic(2, problem.alpha, t))
    u = problem.exact_u(t)
    v = problem.exact_v(t)
    dv = _complex_step(problem.exact_v, t)
    fast = np.empty_like(t)
    slow = np.empty_like(t)
    for k, tk in enumerate(t):
        fast[k] = dv[k] + problem.g(u[k], v[k]) - problem.f(tk)
        slow[k] = d_alpha_u[k] - problem.eps * problem.R(tk, u[k], v[k])
    return fast, slow


@dataclass(frozen=True)
class AssumptionReport:
    """Grid estimates of the bounds in the standing assumptions on R and g."""

    C_R: float
    L1_R: float
    L2_R: float
    C_g: float
    L3: float
    L4: float
    g_min: float
    sample_box: dict

    @property
    def within_theory(self) -> bool:
        return self.g_min > 0


def _axis(lo, hi, n):
    if not hi >= lo:
        raise ValueError(f"empty range ({lo}, {hi})")
    if n < 2:
        raise ValueError("need at least 2 grid points per axis")
    return np.linspace(lo, hi, n)


def _partial(fn, x, lo, hi):
    # one-sided at the box edges so every evaluation stays inside the box
    h = 1e-6 * (1.0 + abs(x))
    if hi - lo < 2 * h:
        h = max((hi - lo) / 4, 1e-12)
    if x - h < lo:
        return (fn(x + h) - fn(x)) / h
    if x + h > hi:
        return (fn(x) - fn(x - h)) / h
    return (fn(x + h) - fn(x - h)) / (2 * h)


def assumption_probe(problem: CoupledProblem, box: dict, grid=(11, 11, 11)) -> AssumptionReport:
    """Estimate C_R, Lipschitz constants and g_min on a tensor grid.

    ``box`` maps "t", "u", "v" to (lo, hi) ranges; ``grid`` gives the number
    of points per axis in the same order.  Partial derivatives are finite
    differences.  Purely diagnostic.
    """
    try:
        (t_lo, t_hi), (u_lo, u_hi), (v_lo, v_hi) = box["t"], box["u"], box["v"]
    except KeyError as exc:
        raise ValueError(f"box is missing the {exc.args[0]!r} range") from None
    nt, nu, nv = grid
    ts, us, vs = _axis(t_lo, t_hi, nt), _axis(u_lo, u_hi, nu), _axis(v_lo, v_hi, nv)
    R, g = problem.R, problem.g

    C_R = L1 = L2 = 0.0
    C_g = L3 = L4 = 0.0
    g_min = math.inf
    for t, u, v in itertools.product(ts, us, vs):
        try:
            r = R(t, u, v)
            rt = _partial(lambda x: R(x, u, v), t, t_lo, t_hi)
            ru = _partial(lambda x: R(t, x, v), u, u_lo, u_hi)
            rv = _partial(lambda x: R(t, u, x), v, v_lo, v_hi)
        except ArithmeticError:
            r = rt = ru = rv = math.nan
        if not all(math.isfinite(x) for x in (r, rt, ru, rv)):
            raise ProbeError(f"R is not finite near (t, u, v) = ({t}, {u}, {v})",
                             point=(t, u, v))
        C_R = max(C_R, abs(r), abs(rt))
        L1 = max(L1, abs(ru))
        L2 = max(L2, abs(rv))

    for u, v in itertools.product(us, vs):
        try:
            gv = g(u, v)
            gu = _partial(lambda x: g(x, v), u, u_lo, u_hi)
            dv = _partial(lambda x: g(u, x), v, v_lo, v_hi)
        except ArithmeticError:
            gv = gu = dv = math.nan
        if not all(math.isfinite(x) for x in (gv, gu, dv)):
            raise ProbeError(f"g is not finite near (u, v) = ({u}, {v})", point=(u, v))
        C_g = max(C_g, abs(gv))
        L3 = max(L3, abs(gu))
        L4 = max(L4, dv)
        g_min = min(g_min, dv)

    return AssumptionReport(C_R, L1, L2, C_g, L3, L4, g_min,
                            {"t": (t_lo, t_hi, nt), "u": (u_lo, u_hi, nu),
                             "v": (v_lo, v_hi, nv)})
