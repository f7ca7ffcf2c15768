import math

import numba
import numpy as np
import pytest

from fracms import (CellSolution, CoupledProblem, MacroConfig, NonConvergenceError,
                    StepScheme, cell_average, convergence_order, example4, get_problem,
                    multiscale_solve, reconstruct_fast, shoot_periodic)


@numba.njit
def decay(u, v):
    return (u + 1.0) * v


@numba.njit
def wave(t):
    return math.sin(2.0 * math.pi * t)


@numba.njit
def no_source(t, u, v):
    return 0.0


@numba.njit
def source_v(t, u, v):
    return v


def cell_of(samples, dt=0.25):
    s = np.asarray(samples, dtype=float)
    return CellSolution(0.0, dt, s, 1.0, 1, 0.0, np.zeros(1))


def toy(R, horizon=20.0):
    return CoupledProblem("toy", decay, R, wave, u0=0.3, v0=0.0, alpha=0.5, eps=1e-3,
                          horizon=horizon, period=1.0)


def test_zero_source_keeps_slow_value():
    state, rep = multiscale_solve(toy(no_source), MacroConfig(dT=2.5, dt=0.05))
    assert np.all(state.U == 0.3)
    assert len(state.times) == 9 and state.times[-1] == 20.0
    assert rep.shooting_iters == state.cycles.sum() > 0


def test_constant_and_sample_averages():
    @numba.njit
    def const(t, u, v):
        return 4.5

    p = toy(const)
    assert cell_average(p, cell_of([1, 2, 3, 1]), 1.0, 0.0) == pytest.approx(4.5)
    q = toy(source_v)
    assert cell_average(q, cell_of([3, 3, 3, 3, 3]), 1.0, 7.0) == 3.0
    for rule in ("mean", "trapezoid"):
        for ct in ("frozen", "absolute"):
            assert cell_average(q, cell_of([3] * 5), 1.0, 7.0, ct, rule) == 3.0
    with pytest.raises(ValueError):
        cell_average(q, cell_of([3] * 5), 1.0, 0.0, averaging="simpson")


def test_example4_mean_versus_trapezoid():
    p = example4()
    cell = shoot_periodic(p.fast_field, StepScheme(), 0.5, 0.0, 0.01, p.v0, tol=1e-10)
    v = cell.samples
    mean = cell_average(p, cell, 0.5, 0.0)
    trap = cell_average(p, cell, 0.5, 0.0, averaging="trapezoid")
    assert mean == pytest.approx(0.25 * v.mean(), rel=1e-13)
    assert abs(mean - trap) <= 0.25 * (v.max() - v.min()) / len(v)


def test_absolute_cell_time_sees_drift():
    @numba.njit
    def clock(t, u, v):
        return t

    p = toy(clock)
    cell = cell_of([0.0] * 5)
    assert cell_average(p, cell, 1.0, 10.0, "frozen") == 10.0
    assert cell_average(p, cell, 1.0, 10.0, "absolute") == pytest.approx(10.5)


def test_config_validation():
    with pytest.raises(ValueError):
        MacroConfig(dT=1.0, dt=0.01, cell_time="midpoint")
    with pytest.raises(ValueError):
        multiscale_solve(toy(no_source), MacroConfig(dT=0.5, dt=0.01))
    with pytest.raises(ValueError):
        multiscale_solve(toy(no_source), MacroConfig(dT=1.0, dt=0.3))


def test_floor_macro_count():
    p = get_problem("example2", horizon=25.0)
    state, _ = multiscale_solve(p, MacroConfig(dT=10.0, dt=0.01))
    assert state.times.tolist() == [0.0, 10.0, 20.0]


def test_micro_step_insensitivity():
    p = get_problem("example2", horizon=300.0)
    l1 = []
    for n in (16, 32, 64, 128):
        _, rep = multiscale_solve(p, MacroConfig(dT=1.0, dt=1 / n, keep_cells=False))
        l1.append(rep.l1_error)
    assert len(set(np.round(l1, 3))) == 1
    assert max(l1) - min(l1) <= 0.01 * np.mean(l1)


def test_macro_first_order():
    p = get_problem("example2", horizon=2000.0)
    errs = []
    for dT in (20.0, 10.0, 5.0):
        _, rep = multiscale_solve(p, MacroConfig(dT=dT, dt=0.01, keep_cells=False))
        errs.append((dT, rep.linf_error))
    assert 0.95 <= convergence_order(errs).slope <= 1.05


def test_warm_start_reduces_shooting():
    p = get_problem("example2", horizon=1000.0)
    for dT in (20.0, 5.0, 1.0):
        warm, _ = multiscale_solve(p, MacroConfig(dT=dT, dt=0.01, keep_cells=False))
        cold, _ = multiscale_solve(p, MacroConfig(dT=dT, dt=0.01, keep_cells=False,
                                                  warm_start=False))
        assert warm.cycles.sum() <= cold.cycles.sum()
        assert np.all(warm.cycles <= cold.cycles + 1)


def test_reconstruction():
    p = get_problem("example2", horizon=60.0)
    state, _ = multiscale_solve(p, MacroConfig(dT=2.0, dt=0.01, tol=1e-8))
    c = state.cells[5]
    assert reconstruct_fast(state, p, 10.0) == c.samples[0]
    assert reconstruct_fast(state, p, 10.5) == pytest.approx(c.samples[50], abs=1e-12)
    assert reconstruct_fast(state, p, 11.0) == pytest.approx(c.samples[0], abs=1e-8)
    with pytest.raises(ValueError):
        reconstruct_fast(state, p, 61.0)
    lean, _ = multiscale_solve(p, MacroConfig(dT=2.0, dt=0.01, tol=1e-8, keep_cells=False))
    assert lean.cells is None
    assert reconstruct_fast(lean, p, 10.0) == pytest.approx(c.samples[0], abs=1e-6)


def test_reconstruction_mid_horizon_example2():
    # frozen from the first verified run: error 1.398 on an amplitude of ~5000
    p = get_problem("example2")
    state, _ = multiscale_solve(p, MacroConfig(dT=1.0, dt=0.01))
    t = 5000.25
    assert abs(reconstruct_fast(state, p, t) - p.exact_v(t)) <= 1.5


def test_shooting_failure_reports_macro_index():
    @numba.njit
    def flat(u, v):
        return 0.0 * v

    @numba.njit
    def push(t):
        return 1.0

    p = CoupledProblem("flat", flat, no_source, push, u0=0.0, v0=0.0, alpha=0.5,
                       eps=1e-3, horizon=5.0, period=1.0, dg_dv=lambda u, v: 0.0)
    with pytest.raises(NonConvergenceError) as info:
        multiscale_solve(p, MacroConfig(dT=1.0, dt=0.1, max_cycles=3))
    assert info.value.index == 1


def test_runs_are_bitwise_repeatable():
    p = get_problem("example3", horizon=50.0)
    a, _ = multiscale_solve(p, MacroConfig(dT=2.0, dt=0.01))
    b, _ = multiscale_solve(p, MacroConfig(dT=2.0, dt=0.01))
    assert a.U.tobytes() == b.U.tobytes()
    assert a.cell_averages.tobytes() == b.cell_averages.tobytes()
