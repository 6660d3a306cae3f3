import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from nutaxis import FIXTURES, SolverParams, State, build_initial, get_fixture, make_grid, simulate, step
from nutaxis.solver import PositivityViolation, select_dt, solve_v, u_flux

from conftest import E2, logistic


def homogeneous_state(eps=0.5, n=64, a=1.0, b=1.0):
    g = make_grid(eps, n)
    return State(0.0, np.full(n, a), np.full(n, b), g)


def test_logistic_oracle_agrees_with_ode_integrator():
    sol = solve_ivp(lambda t, y: [y[0] * y[1], -y[0] * y[1]], (0, 1), [1.0, 1.0], method="DOP853", rtol=1e-13, atol=1e-14)
    u, v = logistic(1.0)
    assert v == pytest.approx(2 / (1 + E2), rel=1e-15)
    assert sol.y[0, -1] == pytest.approx(u, abs=1e-11)
    assert sol.y[1, -1] == pytest.approx(v, abs=1e-11)
    assert v == pytest.approx(0.238406, abs=1e-6) and u == pytest.approx(1.761594, abs=1e-6)


def test_select_dt_formula():
    g = make_grid(1.0, 20)  # dx = 0.1
    s = State(0.0, np.ones(20), np.ones(20), g)
    assert select_dt(s, SolverParams(cfl_safety=0.4, dt_max=1.0)) == pytest.approx(0.002, rel=1e-12)
    s0 = State(0.0, np.zeros(20), np.ones(20), g)
    assert select_dt(s0, SolverParams(dt_max=0.03)) == 0.03


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_select_dt_scales_with_dx_squared(seed):
    # same cell values on a domain twice as long: dx doubles, diffusion-limited since v is flat
    rng = np.random.default_rng(seed)
    u = rng.uniform(0.1, 3.0, 32)
    v = np.full(32, rng.uniform(0.5, 2.0))
    p = SolverParams(dt_max=10.0)
    fine = select_dt(State(0.0, u, v, make_grid(1.0, 32)), p)
    coarse = select_dt(State(0.0, u, v, make_grid(0.5, 32)), p)
    assert coarse / fine == pytest.approx(4.0, rel=1e-12)


def test_v_solve_is_positive_and_bounded():
    g = make_grid(0.5, 64)
    rng = np.random.default_rng(1)
    u = rng.uniform(0, 5, 64)
    v = rng.uniform(1e-8, 1, 64)
    vn = solve_v(u, v, 0.5, g.dx)
    assert np.all(vn > 0) and vn.max() <= v.max()


def test_boundary_fluxes_vanish():
    rng = np.random.default_rng(2)
    f = u_flux(rng.uniform(0, 1, 16), rng.uniform(0.1, 1, 16), 0.1, 1.0)
    assert f[0] == 0.0 and f[-1] == 0.0 and f.size == 17


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_one_step_conserves_total_mass(name):
    s = build_initial(get_fixture(name), make_grid(0.5, 128))
    p = SolverParams()
    new, info = step(s, select_dt(s, p), p)
    assert new.total_mass() == pytest.approx(s.total_mass() + info.clamp_mass, rel=1e-12)
    assert new.v.max() <= s.v.max()


def test_homogeneous_single_step_is_second_order_locally():
    errs = []
    for dt in (1e-2, 5e-3, 2.5e-3):
        s = homogeneous_state()
        new, _ = step(s, dt, SolverParams(dt_max=1.0))
        u, v = logistic(dt)
        errs.append(abs(new.v[0] - v) + abs(new.u[0] - u))
        assert np.ptp(new.u) < 1e-14 and np.ptp(new.v) < 1e-14
    orders = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(orders > 1.9)


def test_heat_only_when_u_vanishes():
    g = make_grid(0.5, 64)
    v0 = 1.0 / np.cosh(g.centers)
    s = State(0.0, np.zeros(64), v0, g)
    tr = simulate(s, SolverParams(dt_max=1e-2), 0.5, sample_interval=0.1)
    masses = [np.sum(x.v) * g.dx for x in tr.snapshots]
    np.testing.assert_allclose(masses, masses[0], rtol=1e-12)
    assert np.all(tr.final.u == 0.0)
    # same as applying the discrete heat semigroup directly
    v = v0.copy()
    for _ in range(50):
        v = solve_v(np.zeros(64), v, 1e-2, g.dx)
    np.testing.assert_allclose(tr.final.v, v, rtol=1e-12)


def test_zero_horizon_keeps_initial_snapshot():
    s = homogeneous_state()
    tr = simulate(s, SolverParams(), 0.0)
    assert len(tr.snapshots) == 1 and tr.final is s and tr.n_steps == 0


def test_sample_times_hit_exactly():
    s = build_initial(get_fixture("gaussian"), make_grid(0.5, 64))
    tr = simulate(s, SolverParams(), 0.3, sample_interval=0.1)
    np.testing.assert_array_equal(tr.times, [0.0, 0.1, 0.2, 0.3])
    assert tr.metadata == {"epsilon": 0.5, "n_cells": 64, "T": 0.3}


def test_invalid_horizon():
    with pytest.raises(ValueError):
        simulate(homogeneous_state(), SolverParams(), -1.0)


@pytest.mark.parametrize(
    "kw", [{"chi": 0.0}, {"cfl_safety": 0.0}, {"cfl_safety": 1.5}, {"dt_max": 0.0}, {"positivity_floor": -1.0}]
)
def test_params_validation(kw):
    with pytest.raises(ValueError):
        SolverParams(**kw)


def test_positivity_violation_triggers_retries():
    calls = []

    def flaky(s, dt, p):
        calls.append(dt)
        if len(calls) < 3:
            raise PositivityViolation("test")
        return step(s, dt, p)

    s = homogeneous_state(eps=1.0, n=8)
    tr = simulate(s, SolverParams(dt_max=1e-3), 1e-3, stepper=flaky)
    assert calls[:3] == [1e-3, 5e-4, 2.5e-4]
    assert tr.times[-1] == 1e-3


def test_retry_exhaustion_propagates():
    def always(s, dt, p):
        raise PositivityViolation("never")

    with pytest.raises(PositivityViolation):
        simulate(homogeneous_state(), SolverParams(max_halvings=3), 0.1, stepper=always)


def test_large_explicit_step_undershoots():
    g = make_grid(0.5, 64)
    u = np.exp(-(g.centers**2) * 20) + 1e-3
    s = State(0.0, u, np.ones(64), g)
    with pytest.raises(PositivityViolation):
        step(s, 100 * select_dt(s, SolverParams()), SolverParams())


def test_undershoot_within_floor_is_clamped():
    g = make_grid(0.5, 64)
    u = np.zeros(64)
    u[32] = 0.1
    v = np.ones(64)
    v[33:] = 3.0  # taxis drains cell 32 to the right
    s = State(0.0, u, v, g)
    p = SolverParams(positivity_floor=1.0)
    new, info = step(s, 0.05, p)
    assert new.u.min() == 0.0
    assert info.clamp_mass > 0.0
    assert new.total_mass() == pytest.approx(s.total_mass() + info.clamp_mass, rel=1e-13)
    with pytest.raises(PositivityViolation):
        step(s, 0.05, SolverParams())
