import math

import numba
import numpy as np
import pytest

from fracms import (FastField, NonConvergenceError, StepScheme, euler_step, example1,
                    integrate_cycle, shoot_periodic)

IMPLICIT = StepScheme("implicit")
EXPLICIT = StepScheme("explicit")


@numba.njit
def zero_g(u, v):
    return 0.0


@numba.njit
def lin_g(u, v):
    return (u + 1.0) * v


@numba.njit
def quad_g(u, v):
    return u * v * v + u * v


@numba.njit
def unit_g(u, v):
    return v


@numba.njit
def two_v(u, v):
    return 2.0 * v


@numba.njit
def sin_forcing(t):
    return math.sin(2.0 * math.pi * t)


@numba.njit
def const_one(t):
    return 1.0


@numba.njit
def const_zero(t):
    return 0.0


@pytest.mark.parametrize("scheme", [EXPLICIT, IMPLICIT])
def test_trivial_step(scheme):
    field = FastField(zero_g, lambda t: 3.0)
    assert euler_step(field, scheme, 0.0, 0.1, 2.0, 0.1) == pytest.approx(2.3, rel=1e-13)


def test_implicit_linear_root():
    field = FastField(lin_g, const_zero)
    assert euler_step(field, IMPLICIT, 1.0, 0.5, 2.0, 0.5) == pytest.approx(1.0, abs=1e-12)


def test_implicit_quadratic_root():
    field = FastField(quad_g, const_zero)
    v = euler_step(field, IMPLICIT, 1.0, 1.0, 1.0, 1.0)
    assert v == pytest.approx(math.sqrt(2.0) - 1.0, abs=1e-12)
    assert v == pytest.approx(0.41421356, abs=1e-8)


def test_explicit_uses_previous_value():
    field = FastField(lin_g, const_one)
    # v_prev + dt (f - (u+1) v_prev)
    assert euler_step(field, EXPLICIT, 1.0, 0.1, 2.0, 0.1) == pytest.approx(2.0 + 0.1 * (1 - 4))


def test_step_rejects_nonpositive_dt():
    with pytest.raises(ValueError):
        euler_step(FastField(lin_g, const_zero), IMPLICIT, 1.0, 0.0, 1.0, 0.0)


def test_scheme_validation():
    with pytest.raises(ValueError):
        StepScheme("rk4")
    with pytest.raises(ValueError):
        StepScheme("implicit", root_tol=0)
    assert StepScheme("explicit-euler").explicit


def test_fixed_point_cycle():
    field = FastField(unit_g, const_one)
    for scheme in (EXPLICIT, IMPLICIT):
        out = integrate_cycle(field, scheme, 7.0, 1.0, 0.0, 0.01)
        assert len(out) == 101
        assert np.all(out == 1.0)


def test_period_must_be_multiple_of_dt():
    with pytest.raises(ValueError):
        integrate_cycle(FastField(unit_g, const_one), IMPLICIT, 0.0, 1.0, 0.0, 0.3)


def test_linear_periodic_response_matches_closed_form():
    field = FastField(two_v, sin_forcing)
    dt = 1e-3
    cell = shoot_periodic(field, IMPLICIT, 0.0, 0.0, dt, 5.0, tol=1e-10)
    t = cell.times
    exact = (2 * np.sin(2 * np.pi * t) - 2 * np.pi * np.cos(2 * np.pi * t)) / (4 + 4 * np.pi ** 2)
    err = np.max(np.abs(cell.samples - exact))
    assert err < 2 * dt


def test_constant_forcing_converges_to_half():
    field = FastField(lin_g, lambda t: 3.0)
    cell = shoot_periodic(field, IMPLICIT, 1.0, 0.0, 0.01, -4.0, tol=1e-12)
    assert np.allclose(cell.samples, 1.5, atol=1e-11)
    ratios = cell.residual_history[1:] / cell.residual_history[:-1]
    assert np.all(ratios[:-1] <= math.exp(-2.0) * 1.05)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_shooting_contraction_for_linear_decay(lam):
    @numba.njit
    def g(u, v):
        return lam * v

    field = FastField(g, sin_forcing)
    cell = shoot_periodic(field, IMPLICIT, 0.0, 0.0, 1e-3, 10.0, tol=1e-11, max_cycles=200)
    r = cell.residual_history
    assert len(r) >= 5
    ratios = r[1:] / r[:-1]
    bound = math.exp(-lam) * (1 + 0.05)
    assert np.all(ratios[:5] <= bound)


def test_nonlinear_contraction():
    @numba.njit
    def g(u, v):
        return 2.0 * v + math.sin(v)

    field = FastField(g, lambda t: math.cos(2 * math.pi * t))
    cell = shoot_periodic(field, IMPLICIT, 0.0, 0.0, 1e-2, 3.0, tol=1e-12, max_cycles=200)
    r = cell.residual_history
    assert len(r) >= 6
    assert np.all(r[1:6] / r[:5] <= math.exp(-1.0) + 0.05)


def test_cell_is_periodic_within_tol():
    field = FastField(lin_g, sin_forcing)
    cell = shoot_periodic(field, EXPLICIT, 0.5, 3.0, 0.01, 0.0, tol=1e-6)
    assert abs(cell.samples[0] - cell.samples[-1]) <= 1e-6
    assert cell.residual <= 1e-6
    assert cell.t_start == 3.0 and cell.frozen_u == 0.5


def test_nonconvergence_carries_history():
    field = FastField(zero_g, const_one)  # v drifts by one each cycle
    with pytest.raises(NonConvergenceError) as info:
        shoot_periodic(field, IMPLICIT, 0.0, 0.0, 0.1, 0.0, tol=1e-5, max_cycles=4)
    assert len(info.value.residual_history) == 4
    assert np.allclose(info.value.residual_history, 1.0)


def test_implicit_and_explicit_agree_to_second_order():
    field = FastField(lin_g, sin_forcing)
    diffs = []
    for dt in (1e-2, 5e-3):
        a = euler_step(field, IMPLICIT, 0.7, 0.3 + dt, 1.3, dt)
        b = euler_step(field, EXPLICIT, 0.7, 0.3 + dt, 1.3, dt)
        diffs.append(abs(a - b))
    assert diffs[0] / diffs[1] == pytest.approx(4.0, rel=0.05)


def test_python_callables_are_accepted():
    field = FastField(lambda u, v: v + u, lambda t: 0.0)
    v = euler_step(field, IMPLICIT, 1.0, 0.1, 1.0, 0.1)
    assert v == pytest.approx((1.0 - 0.1) / 1.1, abs=1e-12)


def test_example1_cell_matches_exact_profile():
    p = example1()
    dt = 1 / 32
    out = integrate_cycle(p.fast_field, EXPLICIT, 0.5, 0.0, 0.0, dt)
    t = dt * np.arange(len(out))
    err = np.max(np.abs(out - (6 * t - t * t)))
    assert abs(out[-1]) < 0.2
    # first-order Euler: error a small multiple of dt
    assert err < 10 * dt
    cell = shoot_periodic(p.fast_field, EXPLICIT, 0.5, 0.0, dt, 0.0, tol=1e-5)
    assert np.max(np.abs(cell.samples - (6 * t - t * t))) < 10 * dt
