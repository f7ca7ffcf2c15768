import math
import time

import numba
import numpy as np
import pytest

from fracms import (CoupledProblem, DirectConfig, DivergenceError, StepScheme,
                    assumption_probe, convergence_order, direct_solve, example1,
                    get_problem)

# Frozen from the first verified run (explicit Euler, dt = 1/32 on [0, 6]):
# u: 1.5886e-05, v: 0.17331.  Bounds carry ~5% headroom.
EX1_U_LINF = 1.67e-5
EX1_V_LINF = 0.182


@numba.njit
def zero3(t, u, v):
    return 0.0


@numba.njit
def zero2(u, v):
    return 0.0


@numba.njit
def zero1(t):
    return 0.0


def test_everything_zero_keeps_initial_state():
    p = CoupledProblem("still", zero2, zero3, zero1, u0=0.7, v0=-1.5, alpha=0.5,
                       eps=1e-4, horizon=4.0, period=1.0)
    u, v, rep = direct_solve(p, DirectConfig(0.125, record_stride=1))
    assert np.all(u.values == 0.7) and np.all(v.values == -1.5)
    assert len(u) == 33 and rep.steps == 32
    assert rep.l1_error is None


def test_example1_regression_bound():
    u, v, rep = direct_solve(example1(), DirectConfig(1 / 32, StepScheme("explicit"),
                                                      record_stride=1))
    assert rep.linf_error <= EX1_U_LINF
    assert rep.extra["v_linf_error"] <= EX1_V_LINF
    assert u.times[-1] == 6.0 and len(u) == 193


def test_recording_grid_includes_final_point():
    p = get_problem("example2", horizon=3.0)
    u, v, _ = direct_solve(p, DirectConfig(0.125, record_stride=5))
    assert u.times.tolist() == [0.0, 0.625, 1.25, 1.875, 2.5, 3.0]


def test_dt_must_divide_horizon():
    with pytest.raises(ValueError):
        direct_solve(get_problem("example2", horizon=1.0), DirectConfig(0.3))
    with pytest.raises(ValueError):
        DirectConfig(0.0)
    with pytest.raises(ValueError):
        DirectConfig(0.1, record_stride=0)


def test_example2_terminal_error_halves():
    # R carries 1/v and the exact v crosses zero, so the sup-norm is set by
    # isolated spikes; the accumulated error at the end of the run is smooth.
    p = get_problem("example2", horizon=500.0)
    errs = []
    for n in (32, 64, 128):
        u, _, _ = direct_solve(p, DirectConfig(1 / n, record_stride=n))
        errs.append(abs(u.values[-1] - p.exact_u(500.0)))
    for e0, e1 in zip(errs, errs[1:]):
        assert 1.6 <= e0 / e1 <= 2.4


@pytest.mark.parametrize("name,horizon,scheme,check_u", [
    ("example1", 6.0, "explicit", True),
    ("example1", 6.0, "implicit", True),
    ("example2", 50.0, "implicit", False),
    ("example3", 100.0, "implicit", True),
])
def test_first_order_accuracy(name, horizon, scheme, check_u):
    p = get_problem(name, horizon=horizon)
    h, eu, ev = [], [], []
    for n in (32, 64, 128):
        _, _, rep = direct_solve(p, DirectConfig(1 / n, StepScheme(scheme), record_stride=1))
        h.append(1 / n)
        eu.append(rep.linf_error)
        ev.append(rep.extra["v_linf_error"])
    assert 0.8 <= convergence_order(zip(h, ev)).slope <= 1.2
    if check_u:
        assert 0.8 <= convergence_order(zip(h, eu)).slope <= 1.2


def test_cost_grows_quadratically():
    p = get_problem("example2", horizon=1e6)
    direct_solve(p, DirectConfig(1 / 32, horizon=1.0))  # compile
    ns = [2000, 4000, 8000, 16000]
    walls = []
    for N in ns:
        best = math.inf
        for _ in range(3):
            t0 = time.perf_counter()
            direct_solve(p, DirectConfig(1 / 32, horizon=N / 32))
            best = min(best, time.perf_counter() - t0)
        walls.append(best)
    slope = np.polyfit(np.log(ns), np.log(walls), 1)[0]
    assert 1.7 <= slope <= 2.2


def test_slow_variable_stays_within_a_priori_bound():
    p = get_problem("example3", horizon=100.0)
    u, v, _ = direct_solve(p, DirectConfig(1 / 32, record_stride=1))
    box = {"t": (0.0, 100.0), "u": (u.values.min(), u.values.max()),
           "v": (v.values.min(), v.values.max())}
    rep = assumption_probe(p, box, grid=(41, 3, 41))
    T, a = p.horizon, p.alpha
    bound = abs(p.u0) + 1.1 * p.eps * rep.C_R * T ** a / math.gamma(a + 1)
    assert np.max(np.abs(u.values)) <= bound


def test_divergence_names_the_step():
    @numba.njit
    def blowup(t, u, v):
        return u ** 40

    with pytest.warns(UserWarning, match="not small"):
        p = CoupledProblem("blowup", zero2, blowup, zero1, u0=2.0, v0=0.0, alpha=0.5,
                           eps=1.0, horizon=10.0, period=1.0)
    with pytest.raises(DivergenceError) as info:
        direct_solve(p, DirectConfig(0.5))
    assert info.value.index >= 1
