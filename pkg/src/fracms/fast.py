"""Fast-variable integrators and periodic cell identification.

The fast equation is v' + g(u, v) = f(t) with the slow value u held fixed
over a step (or over a whole forcing period for cell problems).  The hot
loops are numba kernels; ``g``, ``f`` and ``dg_dv`` are compiled with
``numba.njit`` on construction of a :class:`FastField` unless they already
are jitted functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np
from numba.extending import is_jitted

from .exceptions import NonConvergenceError

__all__ = [
    "FastField",
    "StepScheme",
    "CellSolution",
    "euler_step",
    "integrate_cycle",
    "shoot_periodic",
    "steps_per_period",
]

EXPLICIT = "explicit"
IMPLICIT = "implicit"
_KIND_ALIASES = {
    "explicit": EXPLICIT,
    "explicit-euler": EXPLICIT,
    "implicit": IMPLICIT,
    "implicit-euler": IMPLICIT,
}

# kernel status codes
_OK = 0
_ROOT_FAIL = 1
_NONFINITE = 2


def as_kernel(fn):
    """Return ``fn`` compiled for use inside the numba kernels."""
    if fn is None or is_jitted(fn):
        return fn
    return numba.njit(fn)


def _finite_difference_dv(g):
    @numba.njit
    def dg_dv(u, v):
        h = 1e-7 * (1.0 + abs(v))
        return (g(u, v + h) - g(u, v - h)) / (2.0 * h)

    return dg_dv


@dataclass(frozen=True, eq=False)
class FastField:
    """Right-hand side data of v' + g(u, v) = f(t).

    ``dg_dv`` is used by the implicit Newton solve; a central finite
    difference of ``g`` stands in when it is not given.  The monotonicity
    bound 0 < g_min <= dg/dv is not checked here, see
    :func:`fracms.problems.assumption_probe`.
    """

    g: object
    f: object
    period: float = 1.0
    dg_dv: object = None

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError(f"period must be positive, got {self.period!r}")
        object.__setattr__(self, "period", float(self.period))
        object.__setattr__(self, "g", as_kernel(self.g))
        object.__setattr__(self, "f", as_kernel(self.f))
        if self.dg_dv is None:
            object.__setattr__(self, "dg_dv", _finite_difference_dv(self.g))
        else:
            object.__setattr__(self, "dg_dv", as_kernel(self.dg_dv))


@dataclass(frozen=True)
class StepScheme:
    kind: str = IMPLICIT
    root_tol: float = 1e-12
    root_max_iter: int = 50

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", _KIND_ALIASES[self.kind])
        except KeyError:
            raise ValueError(f"unknown step scheme {self.kind!r}") from None
        if not self.root_tol > 0:
            raise ValueError("root_tol must be positive")
        if self.root_max_iter < 1:
            raise ValueError("root_max_iter must be at least 1")

    @property
    def explicit(self) -> bool:
        return self.kind == EXPLICIT


@dataclass(frozen=True, eq=False)
class CellSolution:
    """One converged forcing period of the fast variable at frozen u.

    ``samples`` holds v_0..v_K on t_start + k*dt.  ``residual_history``
    lists |v_K - v_0| for every shooting cycle, the last entry being
    ``residual``.
    """

    t_start: float
    dt: float
    samples: np.ndarray
    frozen_u: float
    shooting_iters: int
    residual: float
    residual_history: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(len(self.samples))

    @property
    def period(self) -> float:
        return self.dt * (len(self.samples) - 1)


def steps_per_period(period: float, dt: float, rtol: float = 1e-12) -> int:
    """Number of micro steps K with K*dt == period, or ValueError."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    ratio = period / dt
    k = int(round(ratio))
    if k < 1 or abs(ratio - k) > rtol * max(1.0, ratio):
        raise ValueError(f"dt={dt!r} does not divide the period {period!r}")
    return k


# --- kernels --------------------------------------------------------------

@numba.njit
def _implicit_root(g, dg_dv, u, rhs, dt, v_start, tol, max_iter):
    """Root of v + dt*g(u, v) = rhs reached from v_start.

    Damped Newton first, then bisection on a geometrically expanded bracket.
    Returns (v, ok, |residual|).
    """
    v = v_start
    F = v + dt * g(u, v) - rhs
    if F == 0.0:
        return v, True, 0.0
    for _ in range(max_iter):
        J = 1.0 + dt * dg_dv(u, v)
        if J == 0.0 or not math.isfinite(J) or not math.isfinite(F):
            break
        step = F / J
        if abs(step) <= tol * (1.0 + abs(v)):
            v = v - step
            F = v + dt * g(u, v) - rhs
            return v, True, abs(F)
        lam = 1.0
        v_new = v - step
        F_new = v_new + dt * g(u, v_new) - rhs
        halvings = 0
        while not abs(F_new) < abs(F) and halvings < 40:
            lam *= 0.5
            v_new = v - lam * step
            F_new = v_new + dt * g(u, v_new) - rhs
            halvings += 1
        if not abs(F_new) < abs(F):
            break
        v = v_new
        F = F_new
        if F == 0.0:
            return v, True, 0.0

    # bisection fallback
    B = 1.0 + abs(v_start)
    lo = v_start - B
    hi = v_start + B
    F_lo = lo + dt * g(u, lo) - rhs
    F_hi = hi + dt * g(u, hi) - rhs
    expansions = 0
    while not (F_lo * F_hi <= 0.0) and expansions < 60:
        B *= 2.0
        lo = v_start - B
        hi = v_start + B
        F_lo = lo + dt * g(u, lo) - rhs
        F_hi = hi + dt * g(u, hi) - rhs
        expansions += 1
    if not (F_lo * F_hi <= 0.0):
        return v, False, abs(F)
    if F_lo == 0.0:
        return lo, True, 0.0
    if F_hi == 0.0:
        return hi, True, 0.0
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        F_mid = mid + dt * g(u, mid) - rhs
        if F_mid == 0.0 or mid == lo or mid == hi:
            return mid, True, abs(F_mid)
        if (F_mid < 0.0) == (F_lo < 0.0):
            lo = mid
            F_lo = F_mid
        else:
            hi = mid
        if hi - lo <= tol * (1.0 + abs(mid)):
            mid = 0.5 * (lo + hi)
            return mid, True, abs(mid + dt * g(u, mid) - rhs)
    return v, False, abs(F)


@numba.njit
def _step(g, dg_dv, f, explicit, u, t_next, v_prev, dt, tol, max_iter):
    if explicit:
        return v_prev + dt * (f(t_next) - g(u, v_prev)), True, 0.0
    rhs = v_prev + dt * f(t_next)
    return _implicit_root(g, dg_dv, u, rhs, dt, v_prev, tol, max_iter)


@numba.njit
def _cycle(g, dg_dv, f, explicit, u, v_init, t_start, dt, K, tol, max_iter, out):
    """Fill out[0..K]; returns (status, failing index, last iterate, residual)."""
    out[0] = v_init
    for k in range(1, K + 1):
        v, ok, res = _step(g, dg_dv, f, explicit, u, t_start + k * dt, out[k - 1],
                           dt, tol, max_iter)
        out[k] = v
        if not ok:
            return _ROOT_FAIL, k, v, res
        if not math.isfinite(v):
            return _NONFINITE, k, v, res
    return _OK, K, out[K], 0.0


@numba.njit
def _shoot(g, dg_dv, f, explicit, u, t_start, dt, K, v_guess, shoot_tol, max_cycles,
           tol, max_iter, out, residuals):
    """Algorithm: integrate a cycle, stop when |v_K - v_0| <= shoot_tol, else reseed.

    Returns (status, cycles run, failing step, last iterate, root residual).
    """
    v0 = v_guess
    for c in range(max_cycles):
        status, k, last, res = _cycle(g, dg_dv, f, explicit, u, v0, t_start, dt, K,
                                      tol, max_iter, out)
        if status != _OK:
            return status, c + 1, k, last, res
        r = abs(out[K] - out[0])
        residuals[c] = r
        if r <= shoot_tol:
            return _OK, c + 1, K, out[K], 0.0
        v0 = out[K]
    return _OK, max_cycles, K, out[K], 0.0


# --- public API -----------------------------------------------------------

def _raise_kernel_failure(status, where, last, res):
    if status == _ROOT_FAIL:
        raise NonConvergenceError(
            f"implicit Euler root solve failed {where} (last iterate {last!r}, "
            f"residual {res!r})", last_iterate=last, residual=res)
    raise NonConvergenceError(
        f"fast variable became non-finite {where}", last_iterate=last, residual=res)


def euler_step(field: FastField, scheme: StepScheme, u: float, t_next: float,
               v_prev: float, dt: float) -> float:
    """Advance v by one Euler step of size ``dt`` ending at ``t_next``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    v, ok, res = _step(field.g, field.dg_dv, field.f, scheme.explicit, float(u),
                       float(t_next), float(v_prev), float(dt), scheme.root_tol,
                       scheme.root_max_iter)
    if not ok:
        _raise_kernel_failure(_ROOT_FAIL, f"at t={t_next!r}", v, res)
    return v


def integrate_cycle(field: FastField, scheme: StepScheme, u: float, v_init: float,
                    t_start: float, dt: float) -> np.ndarray:
    """v on the K+1 grid points of [t_start, t_start + period] from ``v_init``."""
    K = steps_per_period(field.period, dt)
    out = np.empty(K + 1)
    status, k, last, res = _cycle(field.g, field.dg_dv, field.f, scheme.explicit,
                                  float(u), float(v_init), float(t_start), float(dt), K,
                                  scheme.root_tol, scheme.root_max_iter, out)
    if status != _OK:
        _raise_kernel_failure(status, f"at t={t_start + k * dt!r}", last, res)
    return out


def shoot_periodic(field: FastField, scheme: StepScheme, u: float, t_start: float,
                   dt: float, v_guess: float, tol: float = 1e-5,
                   max_cycles: int = 1000) -> CellSolution:
    """Identify the periodic fast response at frozen ``u`` by repeated cycles.

    Each cycle starts from the previous cycle's end value.  The returned cell
    is the last full cycle, whose start/end mismatch is at most ``tol``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_cycles < 1:
        raise ValueError("max_cycles must be at least 1")
    K = steps_per_period(field.period, dt)
    out = np.empty(K + 1)
    residuals = np.full(max_cycles, np.nan)
    status, cycles, k, last, res = _shoot(
        field.g, field.dg_dv, field.f, scheme.explicit, float(u), float(t_start),
        float(dt), K, float(v_guess), float(tol), int(max_cycles), scheme.root_tol,
        scheme.root_max_iter, out, residuals)
    if status != _OK:
        _raise_kernel_failure(status, f"in shooting cycle {cycles} at "
                              f"t={t_start + k * dt!r}", last, res)
    history = residuals[:cycles].copy()
    residual = float(history[-1])
    if not residual <= tol:
        raise NonConvergenceError(
            f"periodic shooting at u={u!r}, t_start={t_start!r} did not reach "
            f"tol={tol!r} in {max_cycles} cycles (residual {residual!r})",
            last_iterate=float(out[K]), residual=residual, residual_history=history)
    assert abs(out[0] - out[K]) <= tol
    return CellSolution(float(t_start), float(dt), out, float(u), int(cycles),
                        residual, history)
