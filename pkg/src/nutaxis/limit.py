"""Numerical passage to the limit eps -> 0.

An eps-ladder is simulated on nested grids (fixed dx, ``n = 2 / (eps dx)``)
so that the common window ``[-W, W]`` is an exact cell selection in every
member. Window distances between members give Cauchy evidence, and the weak
formulation is checked on individual trajectories with a bank of smooth,
compactly supported space-time test functions.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cutoff import blend, eval_cutoff, make_cutoff
from .grid import gradient
from .initial_data import InitialDataSpec, build_initial
from .grid import make_grid
from .solver import SolverParams, Trajectory, simulate

log = logging.getLogger(__name__)


class SweepError(RuntimeError):
    """A sweep member failed; ``epsilon`` names the member."""

    def __init__(self, epsilon: float, cause: BaseException):
        super().__init__(f"eps={epsilon:g}: {type(cause).__name__}: {cause}")
        self.epsilon = epsilon


def cells_for(epsilon: float, dx: float) -> int:
    """Cell count giving spacing ``dx`` on B_{1/eps}; must be an even integer."""
    n = 2.0 / (epsilon * dx)
    k = int(round(n))
    if abs(n - k) > 1e-9 * n or k % 2:
        raise ValueError(f"2/(eps*dx) = {n} is not an even integer (eps={epsilon}, dx={dx})")
    return k


def window_slice(grid, W: float) -> slice:
    """Cells of ``grid`` whose centers lie in ``(-W, W)``."""
    offset = (grid.half_length - W) / grid.dx
    start = int(round(offset))
    if abs(offset - start) > 1e-9 * max(1.0, offset) or start < 0:
        raise ValueError(f"window half-width {W} is not aligned with dx={grid.dx}")
    return slice(start, grid.n_cells - start)


@dataclass
class SweepResult:
    epsilons: tuple
    trajectories: list
    W: float
    T: float
    dx: float
    times: np.ndarray
    u: np.ndarray  # (n_eps, n_times, n_window)
    v: np.ndarray
    x: np.ndarray  # window cell centers
    spec: InitialDataSpec | None = None
    distances: dict = field(default_factory=dict)

    def restrict(self, traj: Trajectory):
        sl = window_slice(traj.grid, self.W)
        return np.array([s.u[sl] for s in traj.snapshots]), np.array([s.v[sl] for s in traj.snapshots])


def _simulate_member(args):
    spec, params, eps, n, T, sample_interval, monitors = args
    init = build_initial(spec, make_grid(eps, n))
    return simulate(init, params, T, monitors=monitors, sample_interval=sample_interval)


def run_sweep(
    spec: InitialDataSpec,
    params: SolverParams,
    epsilons,
    T: float,
    dx: float,
    W: float = 1.0,
    sample_interval: float = 0.05,
    monitors=None,
    workers: int = 1,
) -> SweepResult:
    """Simulate every eps on grids of equal spacing and restrict to ``[-W, W]``."""
    epsilons = tuple(float(e) for e in epsilons)
    if len(epsilons) < 3:
        raise ValueError(f"need at least 3 eps values, got {len(epsilons)}")
    if any(b >= a for a, b in zip(epsilons, epsilons[1:])):
        raise ValueError(f"eps values must be strictly decreasing: {epsilons}")
    if spec.hypothesis_exempt:
        raise ValueError("sweeps need hypothesis-satisfying initial data")
    if not 0.0 < W < 1.0 / epsilons[0]:
        raise ValueError(f"window half-width W={W} must lie inside B_(1/{epsilons[0]:g})")
    if abs(W / dx - round(W / dx)) > 1e-9:
        raise ValueError("W must be a multiple of dx")
    cells = [cells_for(e, dx) for e in epsilons]
    jobs = [(spec, params, e, n, T, sample_interval, monitors) for e, n in zip(epsilons, cells)]

    trajs = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_simulate_member, j) for j in jobs]
            for e, fut in zip(epsilons, futures):
                try:
                    trajs.append(fut.result())
                except Exception as exc:
                    raise SweepError(e, exc) from exc
    else:
        for e, job in zip(epsilons, jobs):
            try:
                trajs.append(_simulate_member(job))
            except Exception as exc:
                raise SweepError(e, exc) from exc
            log.info("sweep member eps=%g done (%d steps)", e, trajs[-1].n_steps)

    times = trajs[0].times
    for tr in trajs[1:]:
        if tr.times.shape != times.shape or np.max(np.abs(tr.times - times)) > 1e-12:
            raise ValueError("sweep members have different sample times")
    us, vs = [], []
    for tr in trajs:
        sl = window_slice(tr.grid, W)
        us.append([s.u[sl] for s in tr.snapshots])
        vs.append([s.v[sl] for s in tr.snapshots])
    x = trajs[0].grid.centers[window_slice(trajs[0].grid, W)]
    return SweepResult(epsilons, trajs, W, T, dx, times, np.array(us), np.array(vs), x, spec)


def _time_weights(times):
    w = np.zeros_like(times)
    dt = np.diff(times)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w


def pairwise_distances(sw: SweepResult, q: float = 1.0):
    """``L^q`` distances on the window, trapezoid in time; returns ``(D_u, D_v)``."""
    if q < 1.0:
        raise ValueError(f"q must be >= 1, got {q}")
    if sw.u.shape != sw.v.shape or sw.u.shape[1] != sw.times.size or sw.u.shape[2] != sw.x.size:
        raise ValueError("sweep fields do not share one window")
    wt = _time_weights(sw.times)[:, None] * sw.dx
    out = []
    for F in (sw.u, sw.v):
        n = F.shape[0]
        D = np.zeros((n, n))
        for j in range(n):
            for k in range(j + 1, n):
                D[j, k] = D[k, j] = np.sum(np.abs(F[j] - F[k]) ** q * wt) ** (1.0 / q)
        out.append(D)
    sw.distances[q] = tuple(out)
    return out[0], out[1]


def consecutive(D: np.ndarray) -> np.ndarray:
    return np.array([D[j, j + 1] for j in range(D.shape[0] - 1)])


def strictly_decreasing(seq) -> bool:
    seq = np.asarray(seq)
    return bool(np.all(np.diff(seq) < 0))


# weak formulation ------------------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    """``phi(x, t) = bump(x - center) * (1 - s(t / t_end))`` with closed-form derivatives.

    ``bump`` equals 1 on ``|x| <= R`` and vanishes for ``|x| >= S``; the time
    profile is 1 at t = 0 and vanishes for ``t >= t_end``.
    """

    __test__ = False  # not a pytest class

    center: float
    R: float
    S: float
    t_end: float

    def __post_init__(self):
        make_cutoff(self.R, self.S)
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")

    def space(self, x):
        return eval_cutoff(make_cutoff(self.R, self.S), np.asarray(x) - self.center)

    def time(self, t):
        s, s1, _ = blend(np.asarray(t, dtype=float) / self.t_end)
        return 1.0 - s, -s1 / self.t_end

    def support(self) -> tuple[float, float]:
        return self.center - self.S, self.center + self.S


@dataclass(frozen=True)
class TestFunctionBank:
    __test__ = False

    members: tuple

    def __post_init__(self):
        if len(self.members) < 1:
            raise ValueError("empty test-function bank")

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def default_bank(W: float, t_end: float) -> TestFunctionBank:
    """Five members with varied centers and widths inside ``[-W, W]``."""
    shapes = [(0.0, 0.3, 0.8), (0.3, 0.2, 0.6), (-0.4, 0.1, 0.5), (0.0, 0.05, 0.95), (0.5, 0.15, 0.4)]
    return TestFunctionBank(
        tuple(TestFunction(c * W, R * W, S * W, t_end * f) for (c, R, S), f in zip(shapes, (1.0, 0.8, 1.0, 0.6, 0.9)))
    )


@dataclass
class WeakResidual:
    u: np.ndarray  # normalized residual of the u-identity per member
    v: np.ndarray
    u_sides: np.ndarray  # (n_members, 2): LHS, RHS
    v_sides: np.ndarray
    variant: str

    @property
    def max(self) -> float:
        return float(max(self.u.max(), self.v.max()))


def _normalized(lhs, rhs):
    scale = max(abs(lhs), abs(rhs))
    return 0.0 if scale == 0.0 else abs(lhs - rhs) / scale


def weak_residual(traj: Trajectory, bank: TestFunctionBank, variant: str = "derived") -> WeakResidual:
    """Residuals of both weak identities per test function.

    Space integrals are midpoint sums, time integrals trapezoid sums over
    the stored snapshots. ``variant="printed"`` uses ``u v phi_xx`` in the
    second diffusion term of the u-identity, ``"derived"`` uses
    ``u^2 v phi_xx`` as follows from ``u u_x = (u^2)_x / 2``.
    """
    if variant not in ("derived", "printed"):
        raise ValueError(f"variant must be 'derived' or 'printed', got {variant!r}")
    grid = traj.grid
    x, dx = grid.centers, grid.dx
    times = traj.times
    chi = traj.params.chi
    wt = _time_weights(times)
    for m in bank:
        lo, hi = m.support()
        if lo <= -grid.half_length or hi >= grid.half_length:
            raise ValueError(f"test function {m} leaves B_(1/{grid.epsilon:g})")
        if m.t_end > times[-1]:
            raise ValueError(f"test function {m} outlives the horizon {times[-1]:g}")

    # per-snapshot integrands that do not depend on the test function
    us = [s.u for s in traj.snapshots]
    vs = [s.v for s in traj.snapshots]
    vxs = [gradient(v, grid) for v in vs]

    res_u, res_v, su, sv = [], [], [], []
    for m in bank:
        b, bx, bxx = m.space(x)
        tau, tau_t = m.time(times)
        lhs_u = rhs_u = lhs_v = rhs_v = 0.0
        for k, (u, v, vx) in enumerate(zip(us, vs, vxs)):
            if wt[k] == 0.0 or (tau[k] == 0.0 and tau_t[k] == 0.0):
                continue
            phi, phit, phix, phixx = b * tau[k], b * tau_t[k], bx * tau[k], bxx * tau[k]
            second = (u * u * v if variant == "derived" else u * v) * phixx
            lhs_u += wt[k] * np.sum(u * phit) * dx
            rhs_u += wt[k] * np.sum(
                -0.5 * u * u * vx * phix - 0.5 * second - chi * u * u * v * vx * phix - u * v * phi
            ) * dx
            lhs_v += wt[k] * np.sum(v * phit) * dx
            rhs_v += wt[k] * np.sum(vx * phix + u * v * phi) * dx
        phi0 = b * tau[0]
        lhs_u += np.sum(us[0] * phi0) * dx
        lhs_v += np.sum(vs[0] * phi0) * dx
        res_u.append(_normalized(lhs_u, rhs_u))
        res_v.append(_normalized(lhs_v, rhs_v))
        su.append((lhs_u, rhs_u))
        sv.append((lhs_v, rhs_v))
    return WeakResidual(np.array(res_u), np.array(res_v), np.array(su), np.array(sv), variant)
