"""Executable pass/fail checks of the a priori estimates.

Every check returns an :class:`InequalityReport`. Margins are ``RHS - LHS``
in the relative units documented per check, and a report passes iff its
smallest margin is ``>= -tolerance``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cutoff import Cutoff, eval_cutoff
from .functionals import check_pq, epsilon_powers, growth_rhs
from .grid import integrate
from .solver import Trajectory

_TINY = 1e-300


@dataclass
class InequalityReport:
    check_name: str
    times: np.ndarray
    margins: np.ndarray
    tolerance: float
    fitted: dict = field(default_factory=dict)
    components: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    horizon: float | None = None

    @property
    def passed(self) -> bool:
        if self.margins.size == 0:
            return True
        return bool(np.min(self.margins) >= -self.tolerance)

    @property
    def worst_time(self) -> float | None:
        if self.margins.size == 0:
            return None
        return float(self.times[int(np.argmin(self.margins))])

    @property
    def min_margin(self) -> float:
        return float(np.min(self.margins)) if self.margins.size else np.inf

    def component_passed(self, name: str) -> bool:
        m = self.components[name]
        return bool(m.size == 0 or np.min(m) >= -self.tolerance)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = [f"{status} {self.check_name}: min margin {self.min_margin:.3e} (tol {self.tolerance:g})"]
        if self.worst_time is not None:
            parts.append(f"worst at {self.worst_time:.6g}")
        if self.horizon is not None:
            parts.append(f"horizon T={self.horizon:g}")
        if self.fitted:
            parts.append("fitted " + ", ".join(f"{k}={v:.6g}" for k, v in self.fitted.items()))
        for name in self.components:
            if not self.component_passed(name):
                parts.append(f"failing component {name}")
        return "; ".join(parts + self.notes)


def _combine(name, times, components, tol, **kw) -> InequalityReport:
    margins = np.min(np.vstack(list(components.values())), axis=0)
    return InequalityReport(name, np.asarray(times), margins, tol, components=components, **kw)


def check_balance_laws(traj: Trajectory, tol_rel: float = 1e-10) -> InequalityReport:
    """Discrete mass balance, monotone masses, maximum principle and consumption bound.

    Components (relative margins):
      conservation  -|M(t) - M(0) - clamp(t)| / M(0),   M = sum (u + v) dx
      v_nonincrease (mass_v(t_k-1) - mass_v(t_k)) / M(0)
      u_nondecrease (mass_u(t_k) - mass_u(t_k-1)) / M(0)
      max_principle (max v0 - max v(t)) / max v0
      consumption   (int v0 - cumulative dt int u v) / int v0
    """
    if not traj.snapshots:
        raise ValueError("empty trajectory")
    snaps = traj.snapshots
    dx = traj.grid.dx
    times = traj.times
    mass_u = np.array([np.sum(s.u) * dx for s in snaps])
    mass_v = np.array([np.sum(s.v) * dx for s in snaps])
    total = np.array([np.sum(s.u + s.v) * dx for s in snaps])
    sup_v = np.array([np.max(s.v) for s in snaps])
    ref = total[0]
    comps = {
        "conservation": -np.abs(total - total[0] - traj.clamp_mass) / ref,
        "v_nonincrease": np.concatenate([[0.0], -np.diff(mass_v) / ref]),
        "u_nondecrease": np.concatenate([[0.0], np.diff(mass_u) / ref]),
        "max_principle": (sup_v[0] - sup_v) / sup_v[0],
        "consumption": (mass_v[0] - traj.consumed) / mass_v[0],
    }
    notes = []
    if traj.clamp_mass[-1] > 0:
        notes.append(f"clamp mass {traj.clamp_mass[-1]:.3e}")
    return _combine("balance_laws", times, comps, tol_rel, notes=notes, horizon=float(times[-1]))


def _y_series(traj: Trajectory, p: float):
    ys = np.array([s.block(p).y for s in traj.samples])
    ts = np.array([s.t for s in traj.samples])
    return ts, ys


def fit_gronwall_constant(calibration: Trajectory, p: float, q: float) -> float:
    """Largest ``[dy/dt]_+ / (sup_v (lp_u + 1 + eps-powers))`` over the calibration run."""
    if len(calibration.samples) < 2:
        raise ValueError("calibration trajectory needs at least two monitor rows")
    eps = calibration.epsilon
    ts, ys = _y_series(calibration, p)
    dy = np.diff(ys) / np.diff(ts)
    rhs_unit = np.array([growth_rhs(s, p, q, eps, 1.0) for s in calibration.samples[:-1]])
    return float(np.max(np.maximum(dy, 0.0) / rhs_unit))


def check_gronwall(
    traj: Trajectory,
    p: float,
    q: float,
    calibration: Trajectory,
    tol: float = 0.1,
) -> InequalityReport:
    """Calibrate the differential-inequality constant on one run, validate on another.

    Components:
      instantaneous  (C g_k - dy_k) / (C g_k), with dy_k the forward difference of y
                     and g_k = sup_v (lp_u + 1 + eps-powers) at the left sample
      envelope       (y(0) exp(C sup_v0 t) - y(t)) / (y(0) exp(C sup_v0 t))
    """
    if calibration is traj:
        raise ValueError("calibration and validation trajectories must differ")
    check_pq(p, q)
    for s in (traj, calibration):
        if len(s.samples) < 2 or s.samples[0].block(p).q != q:
            raise ValueError(f"trajectory lacks monitor rows for (p={p}, q={q})")
    C = fit_gronwall_constant(calibration, p, q)
    ts, ys = _y_series(traj, p)
    eps = traj.epsilon
    g = np.array([growth_rhs(s, p, q, eps, 1.0) for s in traj.samples[:-1]])
    dy = np.diff(ys) / np.diff(ts)
    bound = C * g
    inst = (bound - dy) / np.where(bound > 0, bound, 1.0)
    sup_v0 = traj.samples[0].sup_v
    env = ys[0] * np.exp(C * sup_v0 * ts)
    envelope = (env - ys) / env
    comps = {
        "instantaneous": np.concatenate([inst, [inst[-1] if inst.size else 0.0]]),
        "envelope": envelope,
    }
    return _combine(
        f"gronwall[p={p:g},q={q:g}]",
        ts,
        comps,
        tol,
        fitted={"C": C, "calibration_epsilon": calibration.epsilon},
        notes=[f"validated at eps={eps:g}"],
        horizon=float(ts[-1]),
    )


def _trapz(values, times):
    values, times = np.asarray(values), np.asarray(times)
    if values.size < 2:
        return 0.0
    return float(np.sum(0.5 * (values[1:] + values[:-1]) * np.diff(times)))


DISSIPATION_QUANTITIES = {
    # name: (extractor, reduction)
    "quartic": (lambda s, p: s.quartic, "integral"),
    "diss_u": (lambda s, p: s.block(p).diss_u, "integral"),
    "diss_q": (lambda s, p: s.diss_q, "integral"),
    "diss_v": (lambda s, p: s.diss_v, "integral"),
    "logv": (lambda s, p: s.logv, "integral"),
    "logv_sup": (lambda s, p: s.logv, "sup"),
    "cut_fisher_sup": (lambda s, p: s.cut_fisher, "sup"),
}


def dissipation_table(family, p: float) -> dict:
    """Per-quantity sequences (one value per trajectory) of time integrals or sups."""
    table = {}
    for name, (get, reduction) in DISSIPATION_QUANTITIES.items():
        seq = []
        for traj in family:
            vals = [get(s, p) for s in traj.samples]
            ts = [s.t for s in traj.samples]
            seq.append(_trapz(vals, ts) if reduction == "integral" else float(np.max(vals)))
        table[name] = np.array(seq)
    return table


def check_dissipation_bounds(family, p: float = 2.0, slack: float = 0.2) -> InequalityReport:
    """Uniform-in-eps boundedness of the dissipation integrals along a family.

    For each quantity the value on the smallest eps must not exceed
    ``(1 + slack)`` times the largest value on the previous members. The
    margin is ``((1 + slack) max_prev - last) / ((1 + slack) max_prev)``.
    """
    family = list(family)
    if len(family) < 3:
        raise ValueError("need at least three trajectories")
    eps = np.array([t.epsilon for t in family])
    if np.any(np.diff(eps) >= 0):
        raise ValueError(f"epsilons must be strictly decreasing, got {eps}")
    horizons = {round(float(t.times[-1]), 12) for t in family}
    if len(horizons) != 1:
        raise ValueError(f"trajectories do not share a horizon: {sorted(horizons)}")
    table = dissipation_table(family, p)
    comps = {}
    for name, seq in table.items():
        cap = (1.0 + slack) * np.max(seq[:-1])
        margin = (cap - seq[-1]) / cap if cap > 0 else (0.0 if seq[-1] <= 0 else -np.inf)
        comps[name] = np.array([margin])
    rep = _combine(
        f"dissipation[p={p:g}]",
        np.array([eps[-1]]),
        comps,
        0.0,
        horizon=horizons.pop(),
        notes=["eps ladder " + ", ".join(f"{e:g}" for e in eps)],
    )
    rep.fitted = {f"{k}[eps={eps[-1]:g}]": float(v[-1]) for k, v in table.items()}
    rep.fitted["slack"] = slack
    return rep


def psi_dictionary(grid, dict_size: int) -> list:
    """Cosine modes normalized to unit ``W^{3,2}`` norm on the ball."""
    if dict_size < 1:
        raise ValueError("dict_size must be >= 1")
    L = grid.half_length
    x = grid.centers
    modes = []
    for k in range(dict_size):
        w = k * np.pi / (2.0 * L)
        arg = w * (x + L)
        derivs = [np.cos(arg), -w * np.sin(arg), -(w**2) * np.cos(arg), w**3 * np.sin(arg)]
        norm = np.sqrt(sum(integrate(d**2, grid) for d in derivs))
        modes.append(derivs[0] / norm)
    return modes


@dataclass
class DualPairingSeries:
    mid_times: np.ndarray
    sup_pairing: np.ndarray
    time_integral: float
    dict_size: int


def dual_pairing_monitor(traj: Trajectory, p: float, c: Cutoff, dict_size: int) -> DualPairingSeries:
    """Dictionary lower bound of the dual norm of ``d/dt (u^((p+1)/2) v phi^2)``.

    For consecutive snapshots the difference quotient is paired with every
    unit-norm cosine mode and the largest absolute pairing is kept; its
    time integral approximates the L^1-in-time dual norm from below.
    """
    if len(traj.snapshots) < 2:
        raise ValueError("need at least two snapshots")
    grid = traj.grid
    modes = psi_dictionary(grid, dict_size)
    phi2 = eval_cutoff(c, grid.centers)[0]
    a = 0.5 * (p + 1.0)
    G = [s.u**a * s.v * phi2 for s in traj.snapshots]
    ts = traj.times
    sups = []
    for j in range(len(G) - 1):
        rate = (G[j + 1] - G[j]) / (ts[j + 1] - ts[j])
        sups.append(max(abs(integrate(rate * psi, grid)) for psi in modes))
    sups = np.array(sups)
    return DualPairingSeries(0.5 * (ts[1:] + ts[:-1]), sups, float(np.sum(sups * np.diff(ts))), dict_size)
