"""L1 discretization of the Caputo derivative of order 0 < alpha < 1.

On a uniform grid t_i = i*dt the L1 scheme approximates

    D^alpha u(t_i) ~ dt^-alpha / Gamma(2 - alpha) *
        [a_0 u_i - sum_{j=1}^{i-1} (a_{i-j-1} - a_{i-j}) u_j - a_{i-1} u_0]

with a_0 = 1 and a_j = (j+1)^(1-alpha) - j^(1-alpha).  Solving that relation
for u_i given the right-hand side is what :func:`caputo_l1_advance` does.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np

from .exceptions import HistoryLengthError, UnsupportedCaseError

__all__ = [
    "FractionalOrder",
    "L1Weights",
    "CaputoHistory",
    "l1_weights",
    "caputo_l1_advance",
    "caputo_analytic",
]


class FractionalOrder(float):
    """A float restricted to the open interval (0, 1)."""

    def __new__(cls, alpha):
        value = float(alpha)
        if not 0.0 < value < 1.0:
            raise ValueError(f"fractional order must lie in (0, 1), got {alpha!r}")
        return super().__new__(cls, value)

    def __repr__(self):
        return f"FractionalOrder({float(self)!r})"


@dataclass(frozen=True, eq=False)
class L1Weights:
    """Weights a_0..a_n and their decrements d_k = a_k - a_{k+1}.

    Both arrays are read-only; ``decrements`` has length n (it is empty
    for n = 0).
    """

    alpha: FractionalOrder
    a: np.ndarray
    decrements: np.ndarray

    @property
    def n(self) -> int:
        return len(self.a) - 1


@lru_cache(maxsize=32)
def _weights_cached(alpha: float, n: int) -> L1Weights:
    j = np.arange(n + 1, dtype=float)
    a = np.empty(n + 1)
    a[0] = 1.0
    # (j+1)^(1-a) - j^(1-a) == j^(1-a) * expm1((1-a) log1p(1/j)); no cancellation
    jj = j[1:]
    a[1:] = jj ** (1.0 - alpha) * np.expm1((1.0 - alpha) * np.log1p(1.0 / jj))
    d = a[:-1] - a[1:]
    a.setflags(write=False)
    d.setflags(write=False)
    return L1Weights(FractionalOrder(alpha), a, d)


def l1_weights(alpha, n: int) -> L1Weights:
    """Return the L1 weights a_0..a_n for order ``alpha``.

    Results are cached per (alpha, n).
    """
    alpha = FractionalOrder(alpha)
    n = int(n)
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    return _weights_cached(float(alpha), n)


@numba.njit(cache=True)
def _memory_sum(a, d, u, i):
    # u[0] is the initial value, u[1..i-1] the accepted history
    s = a[i - 1] * u[0]
    for j in range(1, i):
        s += d[i - 1 - j] * u[j]
    return s


class CaputoHistory:
    """Growing record of slow-variable values on a uniform grid.

    Storage is dense and preallocated for ``capacity`` steps; the L1 weights
    cover exactly that many steps.
    """

    def __init__(self, alpha, dt: float, u0: float, capacity: int):
        if not dt > 0:
            raise ValueError(f"dt must be positive, got {dt!r}")
        if capacity < 1:
            raise ValueError("capacity must be at least 1")
        self.alpha = FractionalOrder(alpha)
        self.dt = float(dt)
        self.u0 = float(u0)
        self.weights = l1_weights(self.alpha, capacity)
        self.scale = math.gamma(2.0 - self.alpha) * self.dt ** float(self.alpha)
        self._buf = np.empty(capacity + 1)
        self._buf[0] = self.u0
        self._n = 0

    def __len__(self):
        return self._n

    @property
    def capacity(self) -> int:
        return len(self._buf) - 1

    @property
    def values(self) -> np.ndarray:
        """Accepted values u_1..u_i (a read-only view)."""
        view = self._buf[1:self._n + 1]
        view.flags.writeable = False
        return view

    @property
    def grid_values(self) -> np.ndarray:
        """u_0..u_i including the initial value (a copy)."""
        return self._buf[:self._n + 1].copy()

    def append(self, value: float) -> None:
        if self._n >= self.capacity:
            raise HistoryLengthError(
                f"history is full ({self.capacity} steps); allocate a larger capacity")
        self._buf[self._n + 1] = value
        self._n += 1


def caputo_l1_advance(history: CaputoHistory, rhs: float) -> float:
    """Solve the L1 relation for the next value u_i.

    ``rhs`` is the already scaled right-hand side (eps * R for the slow
    equation).  Returns

        u_i = Gamma(2-alpha) dt^alpha rhs
              + sum_{j=1}^{i-1} (a_{i-j-1} - a_{i-j}) u_j + a_{i-1} u_0

    without modifying ``history``; the caller appends the result.
    """
    i = len(history) + 1
    w = history.weights
    if i > w.n:
        raise HistoryLengthError(
            f"step {i} needs weights a_0..a_{i}, but only a_0..a_{w.n} are available")
    return history.scale * rhs + _memory_sum(w.a, w.decrements, history._buf, i)


def caputo_analytic(p: int, alpha, t):
    """Caputo derivative of t**p: Gamma(p+1)/Gamma(p+1-alpha) * t**(p-alpha).

    Only p = 1 and p = 2 are supported.  ``t`` may be a scalar or an array.
    """
    if p not in (1, 2):
        raise UnsupportedCaseError(f"only monomials t^1 and t^2 are supported, got p={p!r}")
    alpha = float(FractionalOrder(alpha))
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    out = math.gamma(p + 1) / math.gamma(p + 1 - alpha) * t ** (p - alpha)
    return float(out) if out.ndim == 0 else out
