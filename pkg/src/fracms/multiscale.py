"""Macro-scale L1 stepping of the slow variable driven by periodic cells.

For each macro interval [T_{m-1}, T_m] the fast equation is solved for its
periodic response at the frozen slow value U_{m-1} (one forcing period,
anchored at T_{m-1}), R is averaged over that cell, and U advances with the
L1 update on the macro grid:

    U_m = Gamma(2-a) dT^a eps Rbar_{m-1}
          + sum_{j=1}^{m-1} (a_{m-j-1} - a_{m-j}) U_j + a_{m-1} U_0
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numba
import numpy as np

from .analysis import RunReport, Trajectory, error_norms
from .exceptions import DivergenceError, NonConvergenceError
from .fast import CellSolution, StepScheme, shoot_periodic, steps_per_period
from .fractional import CaputoHistory, caputo_l1_advance
from .problems import CoupledProblem

__all__ = [
    "MacroConfig",
    "MacroState",
    "cell_average",
    "multiscale_solve",
    "reconstruct_fast",
]

CELL_TIMES = ("frozen", "absolute")
AVERAGING = ("mean", "trapezoid")


@dataclass(frozen=True)
class MacroConfig:
    """Settings of a multiscale run.

    ``cell_time`` selects the time argument of R inside the cell average:
    "frozen" evaluates R(T_{m-1}, U, v_k) at every sample, "absolute" uses
    R(T_{m-1} + k*dt, U, v_k).  The forcing f is always evaluated at the
    absolute times of the cell window.
    """

    dT: float
    dt: float
    tol: float = 1e-5
    scheme: StepScheme = field(default_factory=StepScheme)
    horizon: float | None = None
    cell_time: str = "frozen"
    averaging: str = "mean"
    keep_cells: bool = True
    warm_start: bool = True
    max_cycles: int = 1000

    def __post_init__(self):
        if not self.dT > 0 or not self.dt > 0:
            raise ValueError("dT and dt must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.cell_time not in CELL_TIMES:
            raise ValueError(f"cell_time must be one of {CELL_TIMES}")
        if self.averaging not in AVERAGING:
            raise ValueError(f"averaging must be one of {AVERAGING}")
        if self.max_cycles < 1:
            raise ValueError("max_cycles must be at least 1")

    def check(self, period: float) -> int:
        """Validate against a forcing period; returns micro steps per cell."""
        if self.dT < period * (1 - 1e-12):
            raise ValueError(f"macro step {self.dT!r} is shorter than the period {period!r}")
        return steps_per_period(period, self.dt)


@dataclass(eq=False)
class MacroState:
    times: np.ndarray
    U: np.ndarray
    cell_averages: np.ndarray
    cells: list | None
    cycles: np.ndarray
    config: MacroConfig

    def __post_init__(self):
        n = len(self.times)
        if len(self.U) != n or len(self.cell_averages) != n - 1 or len(self.cycles) != n - 1:
            raise ValueError("inconsistent macro state lengths")
        if self.cells is not None and len(self.cells) != n - 1:
            raise ValueError("one cell per macro step expected")

    @property
    def slow(self) -> Trajectory:
        return Trajectory(self.times, self.U, "U")


@numba.njit
def _average(R, t0, dt, U, v, absolute, trapezoid):
    K = len(v) - 1
    s = 0.0
    for k in range(K + 1):
        t = t0 + k * dt if absolute else t0
        r = R(t, U, v[k])
        if trapezoid and (k == 0 or k == K):
            r *= 0.5
        s += r
    return s / K if trapezoid else s / (K + 1)


def cell_average(problem: CoupledProblem, cell: CellSolution, U: float, t_macro: float,
                 cell_time: str = "frozen", averaging: str = "mean") -> float:
    """Average of R(t_k, U, v_k) over the K+1 samples of a converged cell.

    ``averaging="mean"`` is the arithmetic mean of all K+1 samples (the
    periodic endpoint counts twice); "trapezoid" is the composite trapezoid
    rule divided by the period.
    """
    if cell_time not in CELL_TIMES:
        raise ValueError(f"cell_time must be one of {CELL_TIMES}")
    if averaging not in AVERAGING:
        raise ValueError(f"averaging must be one of {AVERAGING}")
    return _average(problem.R, float(t_macro), cell.dt, float(U), cell.samples,
                    cell_time == "absolute", averaging == "trapezoid")


def _macro_steps(horizon, dT):
    return int(math.floor(horizon / dT + 1e-9))


def multiscale_solve(problem: CoupledProblem, config: MacroConfig):
    """Run the multiscale method; returns (MacroState, RunReport).

    When dT does not divide the horizon the run stops at T_M with
    M = floor(horizon / dT); no shortened final step is taken.
    """
    config.check(problem.period)
    horizon = problem.horizon if config.horizon is None else config.horizon
    dT = float(config.dT)
    M = _macro_steps(horizon, dT)
    if M < 1:
        raise ValueError(f"macro step {dT!r} exceeds the horizon {horizon!r}")
    field_ = problem.fast_field
    history = CaputoHistory(problem.alpha, dT, problem.u0, M)
    averages = np.empty(M)
    cycles = np.empty(M, dtype=np.int64)
    cells = [] if config.keep_cells else None
    eps = float(problem.eps)

    start = time.perf_counter()
    U = float(problem.u0)
    guess = float(problem.v0)
    for m in range(1, M + 1):
        T_prev = (m - 1) * dT
        try:
            cell = shoot_periodic(field_, config.scheme, U, T_prev, config.dt, guess,
                                  config.tol, config.max_cycles)
        except NonConvergenceError as exc:
            exc.index = m
            raise
        rbar = cell_average(problem, cell, U, T_prev, config.cell_time, config.averaging)
        U = caputo_l1_advance(history, eps * rbar)
        if not math.isfinite(U):
            raise DivergenceError(f"non-finite slow value at macro step {m} "
                                  f"(T={m * dT!r})", index=m)
        history.append(U)
        averages[m - 1] = rbar
        cycles[m - 1] = cell.shooting_iters
        if cells is not None:
            cells.append(cell)
        guess = float(cell.samples[-1]) if config.warm_start else float(problem.v0)
    wall = time.perf_counter() - start

    state = MacroState(dT * np.arange(M + 1), history.grid_values, averages, cells,
                       cycles, config)
    report = RunReport(wall_seconds=wall, steps=M, shooting_iters=int(cycles.sum()))
    if problem.exact_u is not None:
        report.l1_error, report.linf_error = error_norms(state.slow, problem.exact_u)
    return state, report


def reconstruct_fast(state: MacroState, problem: CoupledProblem, t: float) -> float:
    """Fast variable at time ``t`` read off the periodic cell of its macro step.

    The cell of interval m is anchored at T_{m-1}; ``t`` is mapped to its
    phase within that window and samples are interpolated linearly.  Times
    past T_M use the last cell.  Without retained cells, the cell is solved
    again at U interpolated linearly to ``t``.
    """
    cfg = state.config
    horizon = problem.horizon if cfg.horizon is None else cfg.horizon
    if not 0.0 <= t <= horizon:
        raise ValueError(f"t={t!r} lies outside [0, {horizon!r}]")
    M = len(state.times) - 1
    m = min(int(math.floor(t / cfg.dT)) + 1, M)
    T_prev = state.times[m - 1]

    if state.cells is not None:
        cell = state.cells[m - 1]
    else:
        U0, U1 = state.U[m - 1], state.U[m]
        U = U0 + (U1 - U0) * min((t - T_prev) / cfg.dT, 1.0)
        cell = shoot_periodic(problem.fast_field, cfg.scheme, U, T_prev, cfg.dt,
                              problem.v0, cfg.tol, cfg.max_cycles)

    phase = math.fmod(t - T_prev, problem.period)
    x = phase / cell.dt
    k = int(math.floor(x))
    K = len(cell.samples) - 1
    if k >= K:
        return float(cell.samples[K])
    w = x - k
    return float((1 - w) * cell.samples[k] + w * cell.samples[k + 1])
