import functools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nutaxis import MonitorConfig, SolverParams, get_fixture, make_grid, simulate
from nutaxis.limit import (
    SweepResult,
    TestFunction,
    TestFunctionBank,
    cells_for,
    consecutive,
    default_bank,
    pairwise_distances,
    run_sweep,
    strictly_decreasing,
    weak_residual,
    window_slice,
)

from conftest import fixture_run

LADDER = (0.5, 0.25, 0.125, 0.0625)
# regression baseline: gaussian fixture, dx = 1/32, W = 1, T = 1, samples every 0.05
CAUCHY_U = [0.41523967735786604, 0.22175667117800285, 0.11264832726294557]
CAUCHY_V = [0.04097128562635906, 0.03523607383481992, 0.01864880330015507]


@functools.lru_cache(maxsize=None)
def gaussian_sweep():
    return run_sweep(get_fixture("gaussian"), SolverParams(), LADDER, 1.0, 1 / 32, 1.0, 0.05)


@pytest.mark.parametrize("eps,dx,n", [(0.5, 1 / 32, 128), (0.125, 1 / 32, 512), (1.0, 0.25, 8)])
def test_cells_for(eps, dx, n):
    assert cells_for(eps, dx) == n


@pytest.mark.parametrize("eps,dx", [(0.3, 1 / 32), (1.0, 2 / 9)])
def test_cells_for_rejects(eps, dx):
    with pytest.raises(ValueError):
        cells_for(eps, dx)


@settings(max_examples=30, deadline=None)
@given(k=st.integers(0, 4), w_cells=st.integers(1, 16))
def test_window_slice_selects_window(k, w_cells):
    eps, dx = 0.5**k, 1 / 16
    g = make_grid(eps, cells_for(eps, dx))
    W = min(w_cells * dx, g.half_length)
    sl = window_slice(g, W)
    x = g.centers[sl]
    assert x.size == 2 * round(W / dx)
    assert np.all(np.abs(x) < W)
    np.testing.assert_allclose(x, -x[::-1], atol=1e-15)


def test_window_slice_misaligned():
    with pytest.raises(ValueError):
        window_slice(make_grid(0.5, 64), 0.3)


@pytest.mark.parametrize(
    "eps,W,fixture",
    [
        ((0.5, 0.25), 1.0, "gaussian"),
        ((0.5, 0.5, 0.25), 1.0, "gaussian"),
        ((0.25, 0.5, 0.125), 1.0, "gaussian"),
        ((0.5, 0.25, 0.125), 2.0, "gaussian"),
        ((0.5, 0.25, 0.125), 1.01, "gaussian"),
        ((0.5, 0.25, 0.125), 1.0, "homogeneous"),
    ],
)
def test_run_sweep_rejects(eps, W, fixture):
    with pytest.raises(ValueError):
        run_sweep(get_fixture(fixture), SolverParams(), eps, 0.1, 1 / 32, W)


def test_sweep_window_matches_members():
    sw = gaussian_sweep()
    assert sw.u.shape == (4, sw.times.size, 64)
    for k, tr in enumerate(sw.trajectories):
        u, v = sw.restrict(tr)
        assert np.array_equal(u, sw.u[k]) and np.array_equal(v, sw.v[k])
        np.testing.assert_allclose(tr.grid.centers[window_slice(tr.grid, 1.0)], sw.x, atol=1e-13)


def test_sweep_cauchy_regression():
    sw = gaussian_sweep()
    Du, Dv = pairwise_distances(sw, 1.0)
    np.testing.assert_allclose(consecutive(Du), CAUCHY_U, rtol=1e-9)
    np.testing.assert_allclose(consecutive(Dv), CAUCHY_V, rtol=1e-9)
    assert strictly_decreasing(consecutive(Du)) and strictly_decreasing(consecutive(Dv))
    assert 1.0 in sw.distances


def test_sweep_parallel_matches_serial():
    serial = gaussian_sweep()
    par = run_sweep(get_fixture("gaussian"), SolverParams(), LADDER[:3], 1.0, 1 / 32, 1.0, 0.05, workers=3)
    assert np.array_equal(par.u, serial.u[:3]) and np.array_equal(par.v, serial.v[:3])


def _synthetic(offsets, W=1.0, dx=0.125, T=2.0):
    times = np.linspace(0.0, T, 5)
    x = np.arange(-W + dx / 2, W, dx)
    u = np.array([np.full((times.size, x.size), c) for c in offsets])
    return SweepResult(tuple(np.linspace(0.5, 0.1, len(offsets))), [], W, T, dx, times, u, np.zeros_like(u), x)


@pytest.mark.parametrize("q", [1.0, 2.0, 3.5])
def test_pairwise_distances_constant_offsets(q):
    offsets = [0.0, 1.0, 1.5]
    sw = _synthetic(offsets)
    Du, Dv = pairwise_distances(sw, q)
    measure = 2.0 * 2.0  # |window| * T
    for j in range(3):
        for k in range(3):
            assert Du[j, k] == pytest.approx(abs(offsets[j] - offsets[k]) * measure ** (1 / q), rel=1e-13)
    assert np.all(Dv == 0.0)


def test_pairwise_distances_rejects():
    sw = _synthetic([0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        pairwise_distances(sw, 0.5)
    sw.v = sw.v[:, :, :-1]
    with pytest.raises(ValueError):
        pairwise_distances(sw, 1.0)


def test_strictly_decreasing():
    assert strictly_decreasing([3, 2, 1])
    assert not strictly_decreasing([3, 3, 1])


# test functions -------------------------------------------------------------


def test_test_function_derivatives():
    m = TestFunction(0.2, 0.3, 0.7, 0.5)
    x = np.linspace(-1.0, 1.0, 4001)
    h = x[1] - x[0]
    b, bx, bxx = m.space(x)
    np.testing.assert_allclose(bx[1:-1], (b[2:] - b[:-2]) / (2 * h), atol=1e-4)
    np.testing.assert_allclose(bxx[1:-1], (b[2:] - 2 * b[1:-1] + b[:-2]) / h**2, atol=1e-2)
    t = np.linspace(0.0, 0.6, 6001)
    tau, tau_t = m.time(t)
    k = t[1] - t[0]
    np.testing.assert_allclose(tau_t[1:-1], (tau[2:] - tau[:-2]) / (2 * k), atol=1e-4)
    assert tau[0] == 1.0 and np.all(tau[t >= 0.5] == 0.0)
    assert m.support() == pytest.approx((-0.5, 0.9))


def test_test_function_rejects():
    with pytest.raises(ValueError):
        TestFunction(0.0, 0.5, 0.4, 1.0)
    with pytest.raises(ValueError):
        TestFunction(0.0, 0.3, 0.5, 0.0)
    with pytest.raises(ValueError):
        TestFunctionBank(())


def test_default_bank_inside_window():
    bank = default_bank(1.0, 0.4)
    assert len(bank) == 5
    for m in bank:
        lo, hi = m.support()
        assert -1.0 <= lo and hi <= 1.0 and m.t_end <= 0.4


def test_weak_residual_rejects():
    tr = fixture_run("gaussian", 0.5)
    with pytest.raises(ValueError):
        weak_residual(tr, default_bank(1.0, 0.4), variant="other")
    with pytest.raises(ValueError):
        weak_residual(tr, TestFunctionBank((TestFunction(1.5, 0.2, 0.6, 0.5),)))
    with pytest.raises(ValueError):
        weak_residual(tr, TestFunctionBank((TestFunction(0.0, 0.2, 0.6, 2.0),)))


@pytest.mark.parametrize("n", [256, 512, 1024])
def test_bank_second_derivative_quadrature(n):
    # midpoint sums of phi_xx vanish only once transitions span enough cells
    g = make_grid(0.5, n)
    errs = [abs(np.sum(m.space(g.centers)[2]) * g.dx) for m in default_bank(1.0, 0.4)]
    assert max(errs) < {256: 1e-2, 512: 1e-3, 1024: 1e-6}[n]


def test_weak_residual_homogeneous_time_quadrature():
    # spatially constant fields: only the time quadrature contributes
    res = []
    for si in (0.02, 0.01):
        tr = fixture_run("homogeneous", 0.5, dx=1 / 128, sample_interval=si, dt_max=1e-3)
        res.append(weak_residual(tr, default_bank(1.0, 0.8)).max)
    assert res[0] < 1e-3
    assert res[1] < res[0]


def test_weak_residual_derived_beats_printed():
    tr = fixture_run("gaussian", 0.5, dx=1 / 64, T=0.5, sample_interval=0.005)
    bank = default_bank(1.0, 0.4)
    derived = weak_residual(tr, bank, "derived")
    printed = weak_residual(tr, bank, "printed")
    assert derived.max < 0.05
    assert printed.u.max() > 5 * derived.u.max()
    # the v identity does not depend on the variant
    assert np.array_equal(derived.v, printed.v)
