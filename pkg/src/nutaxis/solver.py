"""Time integration of the regularized nutrient-taxis system on B_{1/eps}.

    u_t = (u v u_x)_x - chi (u^2 v v_x)_x + u v
    v_t = v_xx - u v,          u_x = v_x = 0 on the boundary

One step first solves the linear, implicit v-problem

    (I - dt L + dt diag(u_old)) v_new = v_old

with L the zero-flux three-point Laplacian (an M-matrix system, so v_new > 0
and max v_new <= max v_old), then advances u explicitly in conservative form
with the reaction ``u_old * v_new``. The same product leaves the v-equation,
so ``sum(u + v) dx`` is conserved up to rounding.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .grid import Grid

log = logging.getLogger(__name__)

MAX_HALVINGS = 20


class PositivityViolation(RuntimeError):
    """An explicit u-update undershot below ``-positivity_floor``."""


class SolveFailure(RuntimeError):
    """The tridiagonal v-solve broke down or returned a non-positive field."""


@dataclass(frozen=True)
class State:
    t: float
    u: np.ndarray
    v: np.ndarray
    grid: Grid = field(compare=False)

    def __post_init__(self):
        u = self.grid.check_field(self.u)
        v = self.grid.check_field(self.v)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    def total_mass(self) -> float:
        return float(np.sum(self.u + self.v) * self.grid.dx)


@dataclass(frozen=True)
class SolverParams:
    chi: float = 1.0
    cfl_safety: float = 0.4
    dt_max: float = 1e-2
    positivity_floor: float = 1e-14
    max_halvings: int = MAX_HALVINGS

    def __post_init__(self):
        if not self.chi > 0:
            raise ValueError(f"chi must be positive, got {self.chi}")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if not self.dt_max > 0:
            raise ValueError(f"dt_max must be positive, got {self.dt_max}")
        if self.positivity_floor < 0:
            raise ValueError("positivity_floor must be nonnegative")


@dataclass
class StepInfo:
    """Bookkeeping returned with each step."""

    consumed: float  # dt * sum(u_old * v_new) dx
    clamp_mass: float  # mass added by clamping tiny negative undershoots


@dataclass
class Trajectory:
    """Snapshots at the sample times plus the monitor rows computed on them."""

    snapshots: list
    samples: list
    consumed: np.ndarray  # cumulative consumption at each snapshot
    clamp_mass: np.ndarray  # cumulative clamp mass at each snapshot
    params: SolverParams
    metadata: dict = field(default_factory=dict)
    monitors: object = None
    baseline: float | None = None
    n_steps: int = 0

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def grid(self) -> Grid:
        return self.snapshots[0].grid

    @property
    def epsilon(self) -> float:
        return self.grid.epsilon

    @property
    def initial(self) -> State:
        return self.snapshots[0]

    @property
    def final(self) -> State:
        return self.snapshots[-1]


def face_coefficients(u, v, dx, chi):
    """Arithmetic-mean face values of ``u v`` and ``chi u^2 v`` on interior faces."""
    uv = u * v
    u2v = u * uv
    return 0.5 * (uv[1:] + uv[:-1]), chi * 0.5 * (u2v[1:] + u2v[:-1])


def select_dt(s: State, p: SolverParams) -> float:
    """Explicit step bound ``cfl * dx^2 / (2 D_max)`` capped by ``dt_max``.

    ``D`` on a face is the degenerate diffusivity plus the taxis coefficient
    times the face gradient of v.
    """
    dx = s.grid.dx
    d_uv, d_tax = face_coefficients(s.u, s.v, dx, p.chi)
    vx = np.abs(np.diff(s.v)) / dx
    d_face = d_uv + d_tax * vx
    d_max = max(float(np.max(d_face)), np.finfo(float).eps)
    return float(min(p.cfl_safety * dx**2 / (2.0 * d_max), p.dt_max))


def _v_bands(u, dt, dx):
    n = u.size
    r = dt / dx**2
    ab = np.empty((3, n))
    ab[0, 1:] = -r
    ab[0, 0] = 0.0
    ab[2, :-1] = -r
    ab[2, -1] = 0.0
    ab[1] = 1.0 + 2.0 * r + dt * u
    ab[1, 0] -= r
    ab[1, -1] -= r
    return ab


def solve_v(u_old, v_old, dt, dx) -> np.ndarray:
    """Backward-Euler diffusion with implicit absorption at frozen ``u_old``."""
    try:
        v_new = solve_banded((1, 1), _v_bands(u_old, dt, dx), v_old, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolveFailure(str(exc)) from exc
    if not np.all(np.isfinite(v_new)) or np.any(v_new <= 0.0):
        raise SolveFailure("v-solve produced a non-positive or non-finite field")
    return v_new


def u_flux(u, v, dx, chi):
    """Interior face fluxes ``(uv)_f u_x - chi (u^2 v)_f v_x``; boundary fluxes are zero."""
    d_uv, d_tax = face_coefficients(u, v, dx, chi)
    flux = np.zeros(u.size + 1)
    flux[1:-1] = (d_uv * np.diff(u) - d_tax * np.diff(v)) / dx
    return flux


def step(s: State, dt: float, p: SolverParams) -> tuple[State, StepInfo]:
    """Advance one step of size ``dt``; returns the new state and bookkeeping."""
    dx = s.grid.dx
    u_old, v_old = s.u, s.v
    v_new = solve_v(u_old, v_old, dt, dx)
    reaction = u_old * v_new
    flux = u_flux(u_old, v_new, dx, p.chi)
    u_new = u_old + dt * (np.diff(flux) / dx + reaction)

    clamp = 0.0
    low = u_new.min()
    if low < 0.0:
        if low < -p.positivity_floor:
            raise PositivityViolation(f"u undershoot {low:.3e} at t={s.t:.6g}, dt={dt:.3e}")
        neg = u_new < 0.0
        clamp = float(-np.sum(u_new[neg]) * dx)
        u_new[neg] = 0.0
        log.debug("clamped %d cells, mass %.3e", int(neg.sum()), clamp)
    consumed = float(dt * np.sum(reaction) * dx)
    return State(s.t + dt, u_new, v_new, s.grid), StepInfo(consumed, clamp)


def simulate(
    init: State,
    p: SolverParams,
    T: float,
    monitors=None,
    sample_interval: float | None = None,
    baseline: float | None = None,
    stepper=step,
    metadata: dict | None = None,
) -> Trajectory:
    """Integrate from ``init`` to ``T`` storing a snapshot at every sample time.

    ``sample_interval`` defaults to ``monitors.sample_interval``; without
    either, only the initial and final states are kept. When ``monitors`` is
    given each snapshot is evaluated into a ``FunctionalSample`` row using
    ``baseline`` (default: ``max v`` at t=0) in the log functional.
    ``stepper`` replaces :func:`step`, e.g. with a deliberately broken scheme.
    """
    from .functionals import evaluate_monitors

    if T < 0 or not np.isfinite(T):
        raise ValueError(f"horizon T must be finite and >= 0, got {T}")
    if sample_interval is None:
        sample_interval = monitors.sample_interval if monitors is not None else (T or 1.0)
    if sample_interval <= 0:
        raise ValueError("sample_interval must be positive")
    if baseline is None:
        baseline = float(np.max(init.v))

    n_samples = int(np.ceil(T / sample_interval - 1e-9))
    targets = [min(k * sample_interval, T) for k in range(1, n_samples + 1)]

    s = init
    snapshots, consumed, clamped = [init], [0.0], [0.0]
    total_consumed = total_clamp = 0.0
    n_steps = 0
    for target in targets:
        while s.t < target:
            remaining = target - s.t
            dt = select_dt(s, p)
            if dt >= remaining * (1.0 - 1e-12):
                dt = remaining
            elif dt > 0.5 * remaining:
                # split the last stretch evenly instead of leaving a sliver
                dt = 0.5 * remaining
            for attempt in range(p.max_halvings + 1):
                try:
                    new, info = stepper(s, dt, p)
                    break
                except PositivityViolation:
                    if attempt == p.max_halvings:
                        raise
                    dt *= 0.5
                    log.info("positivity retry %d at t=%.6g, dt -> %.3e", attempt + 1, s.t, dt)
            if dt == remaining:
                new = State(target, new.u, new.v, new.grid)
            s = new
            n_steps += 1
            total_consumed += info.consumed
            total_clamp += info.clamp_mass
        snapshots.append(s)
        consumed.append(total_consumed)
        clamped.append(total_clamp)

    traj = Trajectory(
        snapshots=snapshots,
        samples=[],
        consumed=np.array(consumed),
        clamp_mass=np.array(clamped),
        params=p,
        metadata=dict(metadata or {}),
        monitors=monitors,
        baseline=baseline,
        n_steps=n_steps,
    )
    traj.metadata.setdefault("epsilon", init.grid.epsilon)
    traj.metadata.setdefault("n_cells", init.grid.n_cells)
    traj.metadata.setdefault("T", T)
    if monitors is not None:
        traj.samples = [evaluate_monitors(snap, monitors, baseline) for snap in snapshots]
    return traj
