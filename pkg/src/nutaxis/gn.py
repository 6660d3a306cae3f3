"""Property tests for the domain-independent Gagliardo-Nirenberg inequalities.

Two forms are covered on B_{1/eps} = (-1/eps, 1/eps):

    gn1:  |f|_p   <= C |f'|_r^theta |f|_q^(1-theta) + C eps^(1/sigma - 1/p) |f|_sigma
    gn2:  |f|_inf <= C |f'|_r^theta |f|_q^(1-theta) + C eps^(1/q) |f|_q

with C independent of eps. Sampled functions carry analytic derivatives so
the gradient norm is free of finite-difference error.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, make_grid

RELATION_TOL = 1e-12
DEFAULT_EPSILONS = (1.0, 0.5, 0.25, 0.125)


def gn1_theta(p: float, q: float, r: float) -> float:
    """Solve ``1/p = theta (1/r - 1) + (1 - theta)/q`` for theta."""
    return (1.0 / q - 1.0 / p) / (1.0 / q - 1.0 / r + 1.0)


def gn2_theta(q: float, r: float) -> float:
    """Solve ``theta (1 - r)/r + (1 - theta)/q = 0`` for theta."""
    return (1.0 / q) / ((r - 1.0) / r + 1.0 / q)


# samplers ---------------------------------------------------------------


@dataclass(frozen=True)
class TrigFunction:
    """``g(eps x)`` with ``g(y) = a0 + sum_k a_k cos(k pi y) + b_k sin(k pi y)``."""

    a: np.ndarray
    b: np.ndarray
    epsilon: float

    def _g(self, y):
        k = np.arange(1, self.a.size)
        ky = np.pi * np.multiply.outer(y, k)
        return self.a[0] + np.cos(ky) @ self.a[1:] + np.sin(ky) @ self.b[1:]

    def value(self, x):
        return self._g(self.epsilon * np.asarray(x, dtype=float))

    def deriv(self, x):
        y = self.epsilon * np.asarray(x, dtype=float)
        k = np.arange(1, self.a.size)
        ky = np.pi * np.multiply.outer(y, k)
        dg = (-np.sin(ky) @ (k * self.a[1:]) + np.cos(ky) @ (k * self.b[1:])) * np.pi
        return self.epsilon * dg


@dataclass(frozen=True)
class TrigSampler:
    """Random trigonometric polynomials in the scaled variable ``eps x``."""

    degree: int = 4
    coef_bound: float = 1.0
    seed: int = 42
    n_cells: int = 4096
    name = "trig"

    def draws(self, n_samples: int):
        rng = np.random.default_rng(self.seed)
        shape = (n_samples, self.degree + 1)
        return rng.uniform(-self.coef_bound, self.coef_bound, shape), rng.uniform(
            -self.coef_bound, self.coef_bound, shape
        )

    def functions(self, n_samples: int, epsilon: float):
        A, B = self.draws(n_samples)
        return [TrigFunction(a, b, epsilon) for a, b in zip(A, B)]

    def grid(self, epsilon: float) -> Grid:
        return make_grid(epsilon, self.n_cells)


@dataclass(frozen=True)
class BumpSum:
    """``sum_j c_j exp(-(x - m_j)^2 / (2 w_j^2))`` in physical units."""

    c: np.ndarray
    m: np.ndarray
    w: np.ndarray

    def value(self, x):
        z = (np.subtract.outer(np.asarray(x, dtype=float), self.m)) / self.w
        return np.exp(-0.5 * z**2) @ self.c

    def deriv(self, x):
        z = (np.subtract.outer(np.asarray(x, dtype=float), self.m)) / self.w
        return (-z / self.w * np.exp(-0.5 * z**2)) @ self.c


@dataclass(frozen=True)
class BumpSumSampler:
    """Random Gaussian-bump sums with centers in ``(-center_range, center_range)``.

    The functions do not depend on eps, so larger domains see the same
    physical profile; grids keep ``dx`` fixed across eps.
    """

    n_bumps: int = 3
    center_range: float = 0.8
    width_range: tuple = (0.1, 0.5)
    seed: int = 7
    dx: float = 1.0 / 1024.0
    name = "bumps"

    def functions(self, n_samples: int, epsilon: float):
        rng = np.random.default_rng(self.seed)
        shape = (n_samples, self.n_bumps)
        C = rng.uniform(-1.0, 1.0, shape)
        M = rng.uniform(-self.center_range, self.center_range, shape)
        W = rng.uniform(*self.width_range, shape)
        return [BumpSum(c, m, w) for c, m, w in zip(C, M, W)]

    def grid(self, epsilon: float) -> Grid:
        n = int(round(2.0 / (epsilon * self.dx)))
        return make_grid(epsilon, n + (n % 2))


# cases ------------------------------------------------------------------


@dataclass(frozen=True)
class GNCase:
    p: float  # np.inf for the sup-norm form
    q: float
    r: float
    sigma: float
    theta: float
    sampler: object = field(default_factory=TrigSampler)
    variant: str = "gn1"
    epsilons: tuple = DEFAULT_EPSILONS

    def __post_init__(self):
        if self.variant not in ("gn1", "gn2"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta={self.theta} outside [0, 1]")
        if self.r < 1.0 or self.q <= 0.0:
            raise ValueError("need r >= 1 and q > 0")
        if self.variant == "gn1":
            if not (self.p > 1.0 and 0.0 < self.q < self.p):
                raise ValueError(f"gn1 needs p > 1 and 0 < q < p, got p={self.p}, q={self.q}")
            if not 0.0 < self.sigma <= self.p:
                # sigma > p makes the penalty grow as eps -> 0; untested
                raise ValueError(f"sigma must lie in (0, p], got {self.sigma}")
            lhs = 1.0 / self.p
            rhs = self.theta * (1.0 / self.r - 1.0) + (1.0 - self.theta) / self.q
        else:
            if not np.isinf(self.p) or self.sigma != self.q:
                raise ValueError("gn2 cases have p = inf and sigma = q")
            lhs = 0.0
            rhs = self.theta * (1.0 - self.r) / self.r + (1.0 - self.theta) / self.q
        if abs(lhs - rhs) > RELATION_TOL:
            raise ValueError(f"exponent relation violated by {abs(lhs - rhs):.3e}")
        if any(not 0.0 < e <= 1.0 for e in self.epsilons):
            raise ValueError("epsilons must lie in (0, 1]")

    @property
    def label(self) -> str:
        if self.variant == "gn2":
            return f"gn2(q={self.q:g},r={self.r:g})"
        return f"gn1(p={self.p:g},q={self.q:g},r={self.r:g},sigma={self.sigma:g})"

    @property
    def penalty_exponent(self) -> float:
        if self.variant == "gn2":
            return 1.0 / self.q
        return 1.0 / self.sigma - 1.0 / self.p


def gn1_case(p, q, r, sigma, sampler=None, epsilons=DEFAULT_EPSILONS) -> GNCase:
    theta = gn1_theta(p, q, r)
    return GNCase(p, q, r, sigma, theta, sampler or TrigSampler(), "gn1", tuple(epsilons))


def gn2_case(q, r, sampler=None, epsilons=DEFAULT_EPSILONS) -> GNCase:
    theta = gn2_theta(q, r)
    return GNCase(np.inf, q, r, q, theta, sampler or TrigSampler(), "gn2", tuple(epsilons))


# norms and scaling ------------------------------------------------------


def _norm(values, dx, m):
    a = np.abs(values)
    if np.isinf(m):
        return float(np.max(a))
    return float((np.sum(a**m) * dx) ** (1.0 / m))


def rescale_to_unit(f: np.ndarray, grid: Grid, target: Grid | None = None):
    """Values of ``f1(y) = f(y / eps)`` on the unit ball with the same cell count.

    Cell center j of B_{1/eps} maps to cell center j of B_1, so the values
    carry over unchanged.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.n_cells,):
        raise ValueError(f"field has shape {f.shape}, grid has {grid.n_cells} cells")
    target = target or make_grid(1.0, grid.n_cells)
    if target.epsilon != 1.0 or target.n_cells != grid.n_cells:
        raise ValueError("target must be the unit ball with the same number of cells")
    return f.copy(), target


def check_scaling_identity(f, m: float, epsilon: float, n_cells: int = 2048) -> float:
    """Largest relative error of the two change-of-variables identities.

    ``|f1|_m^m = eps |f|_m^m`` and ``|f1'|_m^m = eps^(1-m) |f'|_m^m`` where
    ``f1(y) = f(y/eps)``; ``f`` must expose ``value`` and ``deriv``.
    """
    if m < 1.0:
        raise ValueError(f"m must be >= 1, got {m}")
    big = make_grid(epsilon, n_cells)
    unit = make_grid(1.0, n_cells)
    x, y = big.centers, unit.centers
    f1 = f.value(y / epsilon)
    df1 = f.deriv(y / epsilon) / epsilon
    errs = []
    for lhs_vals, rhs_vals, factor in (
        (f1, f.value(x), epsilon),
        (df1, f.deriv(x), epsilon ** (1.0 - m)),
    ):
        lhs = np.sum(np.abs(lhs_vals) ** m) * unit.dx
        rhs = factor * np.sum(np.abs(rhs_vals) ** m) * big.dx
        scale = max(abs(lhs), abs(rhs))
        errs.append(0.0 if scale == 0.0 else abs(lhs - rhs) / scale)
    return float(max(errs))


def gn_ratio(f, case: GNCase, epsilon: float, grid: Grid | None = None) -> float:
    """``LHS / RHS`` of the inequality with ``C = 1`` for one function."""
    grid = grid or case.sampler.grid(epsilon)
    x, dx = grid.centers, grid.dx
    vals, d = f.value(x), f.deriv(x)
    lhs = _norm(vals, dx, case.p)
    main = _norm(d, dx, case.r) ** case.theta * _norm(vals, dx, case.q) ** (1.0 - case.theta)
    penalty = epsilon**case.penalty_exponent * _norm(vals, dx, case.sigma)
    rhs = main + penalty
    if rhs == 0.0:
        return 0.0
    return lhs / rhs


# ratio study ------------------------------------------------------------


@dataclass
class GNRatioResult:
    case: GNCase
    n_samples: int
    epsilons: tuple
    ratios: np.ndarray  # shape (n_eps, n_samples)
    scaling_errors: np.ndarray  # max scaling-identity error per eps
    max_variation: float = 2.0

    @property
    def max_ratio(self) -> np.ndarray:
        return self.ratios.max(axis=1)

    @property
    def variation(self) -> float:
        mr = self.max_ratio
        return float(mr.max() / mr.min())

    @property
    def passed(self) -> bool:
        return self.variation < self.max_variation

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["case", "sampler", "seed", "epsilon", "n_samples", "max_ratio", "mean_ratio", "scaling_error"])
        for i, eps in enumerate(self.epsilons):
            w.writerow(
                [
                    self.case.label,
                    self.case.sampler.name,
                    self.case.sampler.seed,
                    f"{eps:.17g}",
                    self.n_samples,
                    f"{self.max_ratio[i]:.17g}",
                    f"{self.ratios[i].mean():.17g}",
                    f"{self.scaling_errors[i]:.3e}",
                ]
            )
        return buf.getvalue()


def estimate_gn_ratio(case: GNCase, n_samples: int, scaling_m=(1.0, 2.0, 3.0, 4.0)) -> GNRatioResult:
    """Max over sampled functions of ``LHS/RHS`` (C = 1) for each eps of the case.

    The constant is judged eps-independent when the largest and smallest
    per-eps maxima differ by less than a factor of 2. Scaling identities are
    evaluated on every sampled function along the way.
    """
    if n_samples < 100:
        raise ValueError(f"need at least 100 samples, got {n_samples}")
    ratios, scal = [], []
    for eps in case.epsilons:
        grid = case.sampler.grid(eps)
        funcs = case.sampler.functions(n_samples, eps)
        ratios.append([gn_ratio(f, case, eps, grid) for f in funcs])
        scal.append(
            max(check_scaling_identity(f, m, eps, min(grid.n_cells, 4096)) for f in funcs for m in scaling_m)
        )
    return GNRatioResult(case, n_samples, tuple(case.epsilons), np.array(ratios), np.array(scal))
