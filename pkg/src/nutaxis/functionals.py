"""Scalar functionals monitored along a trajectory.

One :class:`FunctionalSample` holds, for a single state, every integral the
estimate checks need. All integrals use the midpoint rule of
:mod:`nutaxis.grid` and the same cell-centered gradients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cutoff import Cutoff, eval_cutoff, make_cutoff
from .grid import gradient, integrate
from .solver import State


class NonFiniteFunctional(ArithmeticError):
    """A monitored integral overflowed or became NaN."""


def q_window(p: float) -> tuple[float, float]:
    """Admissible ``[lower, upper)`` range of q for a given p >= 2."""
    return 2.0 * (p + 1.0) * (p + 2.0) / (p + 4.0), 2.0 * (p + 2.0)


def default_q(p: float) -> float:
    return q_window(p)[0]


def alpha_exponent(p: float, q: float) -> float:
    return (2.0 * p - 1.0) * q / (2.0 * (p + 1.0))


def check_pq(p: float, q: float) -> None:
    if p < 2.0:
        raise ValueError(f"p must be >= 2, got {p}")
    lo, hi = q_window(p)
    if not (lo - 1e-12 <= q < hi):
        raise ValueError(f"q={q} outside the admissible window [{lo:g}, {hi:g}) for p={p:g}")


@dataclass(frozen=True)
class MonitorConfig:
    p_list: tuple = (2.0,)
    q_rule: object = "window_min"  # "window_min" (lower end of the window) or a {p: q} mapping
    cutoff: Cutoff = field(default_factory=lambda: make_cutoff(0.5, 0.9))
    sample_interval: float = 0.05
    psi_dictionary_size: int = 8
    q_tilde: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "p_list", tuple(float(p) for p in self.p_list))
        if not self.p_list:
            raise ValueError("p_list must be nonempty")
        for p in self.p_list:
            check_pq(p, self.q_for(p))
        if not 0.0 < self.q_tilde < 1.0:
            raise ValueError(f"q_tilde must lie in (0, 1), got {self.q_tilde}")
        if self.sample_interval <= 0:
            raise ValueError("sample_interval must be positive")
        if self.psi_dictionary_size < 1:
            raise ValueError("psi_dictionary_size must be >= 1")

    def q_for(self, p: float) -> float:
        if self.q_rule == "window_min":
            return default_q(p)
        return float(self.q_rule[p])


@dataclass(frozen=True)
class PBlock:
    """p-dependent part of a sample."""

    p: float
    q: float
    alpha: float
    lp_u: float
    wgrad: float
    y: float
    cut_lp_u: float
    diss_u: float
    w11: float

    COLUMNS = ("q", "alpha", "lp_u", "wgrad", "y", "cut_lp_u", "diss_u", "w11")


@dataclass(frozen=True)
class FunctionalSample:
    t: float
    mass_u: float
    mass_v: float
    cross: float
    sup_v: float
    sup_abs_vx: float
    fisher: float
    quartic: float
    cut_fisher: float
    diss_q: float
    diss_v: float
    logv: float
    blocks: dict

    SCALARS = (
        "t", "mass_u", "mass_v", "cross", "sup_v", "sup_abs_vx", "fisher",
        "quartic", "cut_fisher", "diss_q", "diss_v", "logv",
    )

    def block(self, p: float) -> PBlock:
        return self.blocks[float(p)]

    def columns(self) -> list[str]:
        cols = list(self.SCALARS)
        for p in self.blocks:
            cols += [f"{name}[p={p:g}]" for name in PBlock.COLUMNS]
        return cols

    def row(self) -> list[float]:
        vals = [getattr(self, k) for k in self.SCALARS]
        for b in self.blocks.values():
            vals += [getattr(b, k) for k in PBlock.COLUMNS]
        return vals


def _guard(name: str, value: float) -> float:
    if not np.isfinite(value):
        raise NonFiniteFunctional(f"{name} is not finite ({value})")
    return float(value)


def cutoff_w11_norm(s: State, p: float, c: Cutoff) -> float:
    """``W^{1,1}`` norm of ``u^((p+1)/2) v phi^2``, derivative by the product rule."""
    if p < 2.0:
        raise ValueError(f"p must be >= 2, got {p}")
    g = s.grid
    phi2, dphi2, _ = eval_cutoff(c, g.centers)
    ux, vx = gradient(s.u, g), gradient(s.v, g)
    a = 0.5 * (p + 1.0)
    with np.errstate(over="ignore", invalid="ignore"):
        ua = s.u**a
        body = ua * s.v * phi2
        deriv = a * s.u ** (a - 1.0) * ux * s.v * phi2 + ua * vx * phi2 + ua * s.v * dphi2
    return _guard("w11", float(np.sum(np.abs(body)) * g.dx + np.sum(np.abs(deriv)) * g.dx))


def evaluate_monitors(s: State, cfg: MonitorConfig, baseline: float) -> FunctionalSample:
    """All monitored functionals of one state; ``baseline`` is ``sup v_0``."""
    if not baseline > 0:
        raise ValueError("baseline (sup of v0) must be positive")
    g = s.grid
    u, v = s.u, s.v
    ux, vx = gradient(u, g), gradient(v, g)
    phi2, _, _ = eval_cutoff(cfg.cutoff, g.centers)

    def I(name, f):
        if not np.all(np.isfinite(f)):
            raise NonFiniteFunctional(f"{name} integrand is not finite")
        return _guard(name, integrate(f, g))

    ratio_x = vx / v  # bounded even where v is tiny
    qt = cfg.q_tilde
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        diss_q_density = np.where(u > 0, u ** (qt - 1.0) * v * ux**2, 0.0)

    blocks = {}
    for p in cfg.p_list:
        q = cfg.q_for(p)
        alpha = alpha_exponent(p, q)
        with np.errstate(over="ignore"):
            up = u**p
        lp_u = I("lp_u", up)
        wgrad = I("wgrad", v ** (q - alpha) * np.abs(ratio_x) ** q)
        with np.errstate(divide="ignore", invalid="ignore"):
            diss_u_density = np.where(u > 0, u ** (p - 1.0) * v * ux**2 * phi2, 0.0)
        blocks[p] = PBlock(
            p=p,
            q=q,
            alpha=alpha,
            lp_u=lp_u,
            wgrad=wgrad,
            y=lp_u + wgrad + 3.0,
            cut_lp_u=I("cut_lp_u", up * phi2),
            diss_u=I("diss_u", diss_u_density),
            w11=cutoff_w11_norm(s, p, cfg.cutoff),
        )

    return FunctionalSample(
        t=float(s.t),
        mass_u=I("mass_u", u),
        mass_v=I("mass_v", v),
        cross=I("cross", u * v),
        sup_v=float(np.max(v)),
        sup_abs_vx=float(np.max(np.abs(vx))),
        fisher=I("fisher", v * ratio_x**2),
        quartic=I("quartic", v * ratio_x**4),
        cut_fisher=I("cut_fisher", v * ratio_x**2 * phi2),
        diss_q=I("diss_q", diss_q_density * phi2),
        diss_v=I("diss_v", u * v * ratio_x**2 * phi2),
        logv=I("logv", np.log(baseline / v) * phi2),
        blocks=blocks,
    )


def epsilon_powers(p: float, q: float, epsilon: float) -> float:
    """``eps^((p(q+2)+2)/q) + eps^(q/2)``."""
    return epsilon ** ((p * (q + 2.0) + 2.0) / q) + epsilon ** (q / 2.0)


def growth_rhs(sample: FunctionalSample, p: float, q: float, epsilon: float, fitted_C: float) -> float:
    """``C sup_v (int u^p + 1 + eps^((p(q+2)+2)/q) + eps^(q/2))``."""
    check_pq(p, q)
    lp_u = sample.block(p).lp_u
    return fitted_C * sample.sup_v * (lp_u + 1.0 + epsilon_powers(p, q, epsilon))
