"""Analytic initial-data families and the hypothesis validator.

Profiles are small callables with analytic first derivatives. For positive
profiles the logarithmic derivative is also analytic so that integrands such
as ``v'^2 / v`` stay finite where ``v`` underflows far out in the tails.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, make_grid
from .solver import State

TAIL_TOLERANCE = 1e-8


class Profile:
    """Base class; subclasses define ``value``, ``deriv`` and ``log_deriv``."""

    name = "profile"
    exempt_only = False

    def __call__(self, x):
        return self.value(np.asarray(x, dtype=float))

    def value(self, x):
        raise NotImplementedError

    def deriv(self, x):
        raise NotImplementedError

    def log_deriv(self, x):
        return self.deriv(x) / self.value(x)

    def params(self) -> tuple:
        return ()

    def describe(self) -> str:
        args = ", ".join(repr(float(a)) for a in self.params())
        return f"{self.name}({args})"

    def positive(self) -> bool:
        """Mathematical strict positivity on the whole line."""
        return False


@dataclass(frozen=True)
class Gaussian(Profile):
    amplitude: float
    sigma: float
    name = "gaussian"

    def __post_init__(self):
        if self.sigma <= 0 or self.amplitude < 0:
            raise ValueError(f"gaussian needs amplitude >= 0, sigma > 0: {self}")

    def value(self, x):
        return self.amplitude * np.exp(-(x**2) / (2.0 * self.sigma**2))

    def deriv(self, x):
        return -x / self.sigma**2 * self.value(x)

    def log_deriv(self, x):
        return -x / self.sigma**2

    def params(self):
        return (self.amplitude, self.sigma)

    def positive(self):
        return self.amplitude > 0


@dataclass(frozen=True)
class CompactBump(Profile):
    amplitude: float
    width: float
    name = "compact_bump"

    def __post_init__(self):
        if self.width <= 0 or self.amplitude < 0:
            raise ValueError(f"compact_bump needs amplitude >= 0, width > 0: {self}")

    def value(self, x):
        z = np.asarray(x, dtype=float) / self.width
        out = np.zeros_like(z)
        inside = np.abs(z) < 1.0
        out[inside] = self.amplitude * np.exp(-1.0 / (1.0 - z[inside] ** 2))
        return out

    def deriv(self, x):
        z = np.asarray(x, dtype=float) / self.width
        out = np.zeros_like(z)
        inside = np.abs(z) < 1.0
        zi = z[inside]
        out[inside] = (
            self.amplitude
            * np.exp(-1.0 / (1.0 - zi**2))
            * (-2.0 * zi / (1.0 - zi**2) ** 2)
            / self.width
        )
        return out

    def params(self):
        return (self.amplitude, self.width)


@dataclass(frozen=True)
class Zero(Profile):
    name = "zero"

    def value(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def deriv(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def describe(self):
        return "zero"


@dataclass(frozen=True)
class Constant(Profile):
    """Constant profile; only for hypothesis-exempt solver fixtures."""

    level: float
    name = "constant"
    exempt_only = True

    def value(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.level)

    def deriv(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def log_deriv(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def params(self):
        return (self.level,)

    def positive(self):
        return self.level > 0


@dataclass(frozen=True)
class Sech(Profile):
    amplitude: float
    kappa: float
    name = "sech"

    def __post_init__(self):
        if self.kappa <= 0 or self.amplitude < 0:
            raise ValueError(f"sech needs amplitude >= 0, kappa > 0: {self}")

    def value(self, x):
        return self.amplitude / np.cosh(self.kappa * x)

    def deriv(self, x):
        return -self.kappa * np.tanh(self.kappa * x) * self.value(x)

    def log_deriv(self, x):
        return -self.kappa * np.tanh(self.kappa * x)

    def params(self):
        return (self.amplitude, self.kappa)

    def positive(self):
        return self.amplitude > 0


@dataclass(frozen=True)
class GaussianPos(Profile):
    """``floor + amplitude * exp(-x^2 / (2 sigma^2))``."""

    amplitude: float
    sigma: float
    floor: float = 0.0
    name = "gaussian_pos"

    def __post_init__(self):
        if self.sigma <= 0 or self.amplitude < 0 or self.floor < 0:
            raise ValueError(f"gaussian_pos needs amplitude, floor >= 0, sigma > 0: {self}")

    def _bump(self, x):
        return self.amplitude * np.exp(-(x**2) / (2.0 * self.sigma**2))

    def value(self, x):
        return self.floor + self._bump(x)

    def deriv(self, x):
        return -x / self.sigma**2 * self._bump(x)

    def log_deriv(self, x):
        if self.floor == 0.0:
            return -x / self.sigma**2
        return self.deriv(x) / self.value(x)

    def params(self):
        return (self.amplitude, self.sigma, self.floor)

    def positive(self):
        return self.amplitude > 0 or self.floor > 0


U0_FAMILIES = {"gaussian": Gaussian, "compact_bump": CompactBump, "zero": Zero, "constant": Constant}
V0_FAMILIES = {"sech": Sech, "gaussian_pos": GaussianPos, "constant": Constant}
ZETA_FAMILIES = {"gaussian": Gaussian, "zero": Zero}

DEFAULT_ZETA = Gaussian(1.0, 1.0)

_CALL = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")


def parse_profile(text: str, families: dict) -> Profile:
    """Parse ``"name(a, b, ...)"`` into a profile of one of ``families``."""
    m = _CALL.match(text)
    if not m:
        raise ValueError(f"cannot parse profile {text!r}")
    name, args = m.group(1), m.group(2)
    if name == "default" and families is ZETA_FAMILIES:
        return DEFAULT_ZETA
    if name not in families:
        raise ValueError(f"unknown family {name!r}; expected one of {sorted(families)}")
    values = [float(a) for a in args.split(",")] if args and args.strip() else []
    return families[name](*values)


@dataclass(frozen=True)
class InitialDataSpec:
    u0: Profile
    v0: Profile
    zeta: Profile = DEFAULT_ZETA
    hypothesis_exempt: bool = False

    def __post_init__(self):
        if type(self.u0) not in U0_FAMILIES.values():
            raise ValueError(f"{self.u0.describe()} is not a u0 family")
        if type(self.v0) not in V0_FAMILIES.values():
            raise ValueError(f"{self.v0.describe()} is not a v0 family")
        if type(self.zeta) not in ZETA_FAMILIES.values():
            raise ValueError(f"{self.zeta.describe()} is not a zeta family")
        if not self.hypothesis_exempt:
            for prof in (self.u0, self.v0):
                if prof.exempt_only:
                    raise ValueError(f"{prof.describe()} requires hypothesis_exempt=True")
            if not self.zeta.positive():
                raise ValueError("zeta must be strictly positive unless hypothesis_exempt")

    def describe(self) -> str:
        return (
            f"u0={self.u0.describe()} v0={self.v0.describe()} "
            f"zeta={self.zeta.describe()} exempt={self.hypothesis_exempt}"
        )


def build_initial(spec: InitialDataSpec, grid: Grid) -> State:
    """Sample ``u0 + eps * zeta`` and ``v0`` at cell centers."""
    x = grid.centers
    u = spec.u0(x) + grid.epsilon * spec.zeta(x)
    v = spec.v0(x)
    if not np.all(np.isfinite(u)) or not np.all(np.isfinite(v)):
        raise ValueError("initial data are not finite on the grid")
    if np.any(u <= 0.0):
        raise ValueError(f"sampled u_0 + eps*zeta is not strictly positive (min {u.min():.3e})")
    if np.any(v <= 0.0):
        raise ValueError(f"v_0 is not strictly positive on the grid (min {v.min():.3e})")
    return State(0.0, u, v, grid)


@dataclass
class HypothesisReport:
    K: float
    values: dict
    tails: dict
    passed: bool
    p_list: tuple
    notes: list = field(default_factory=list)

    def failed_checks(self) -> list:
        return [k for k, t in self.tails.items() if not (np.isfinite(t) and t < TAIL_TOLERANCE)] + [
            k for k, v in self.values.items() if not np.isfinite(v)
        ]


def gradient_power_exponents(p: float) -> tuple[float, float]:
    """Power of v0 and integrability exponent in the p-dependent gradient bound."""
    return 3.0 / (2.0 * (p + 1.0)), 2.0 * (p + 1.0) * (p + 2.0) / (p + 4.0)


def _tail_bound(g, x_end: float) -> float:
    """Exponential tail estimate of ``int_{x_end}^inf g`` from the decay over one unit."""
    g_end, g_in = float(g(np.array([x_end]))[0]), float(g(np.array([x_end - 1.0]))[0])
    if g_end == 0.0:
        return 0.0
    if not (np.isfinite(g_end) and np.isfinite(g_in)) or g_in <= g_end:
        return np.inf
    rate = np.log(g_in / g_end)
    return g_end / rate


def validate_hypotheses(
    spec: InitialDataSpec,
    p_list,
    half_length: float = 60.0,
    n_ref: int = 2**17,
) -> HypothesisReport:
    """Evaluate the integrability and K-bounds required of the initial data.

    Every integral over the real line is a midpoint sum on ``[-half_length,
    half_length]`` plus exponential tail estimates at both ends; a check
    fails when its tail estimate is not below 1e-8.
    """
    if spec.hypothesis_exempt:
        raise ValueError("hypothesis-exempt specs have nothing to validate")
    p_list = tuple(float(p) for p in p_list)
    if not p_list:
        raise ValueError("p_list must be nonempty")
    if any(p < 2.0 for p in p_list):
        raise ValueError(f"all p must be >= 2, got {p_list}")

    ref = make_grid(1.0 / half_length, n_ref)
    x = ref.centers
    u0, v0, zeta = spec.u0, spec.v0, spec.zeta

    integrands = {
        "int_u0": lambda x: u0(x),
        "int_v0": lambda x: v0(x),
        "int_zeta": lambda x: zeta(x),
        "fisher_v0": lambda x: v0(x) * v0.log_deriv(x) ** 2,
    }
    for p in p_list:
        beta, m = gradient_power_exponents(p)
        integrands[f"int_u0_pow[p={p:g}]"] = lambda x, p=p: u0(x) ** p
        integrands[f"grad_power[p={p:g}]"] = lambda x, beta=beta, m=m: (
            beta**m * v0(x) ** (beta * m) * np.abs(v0.log_deriv(x)) ** m
        )

    values, tails = {}, {}
    for key, g in integrands.items():
        gx = g(x)
        values[key] = float(np.sum(gx) * ref.dx) if np.all(np.isfinite(gx)) else np.inf
        right = _tail_bound(g, half_length)
        left = _tail_bound(lambda y: g(-y), half_length)
        tails[key] = right + left

    sups = {
        "sup_v0": float(np.max(v0(x))),
        "sup_u0": float(np.max(u0(x))),
        "sup_abs_u0x": float(np.max(np.abs(u0.deriv(x)))),
        "sup_abs_v0x": float(np.max(np.abs(v0.deriv(x)))),
    }
    values.update(sups)

    finite = all(np.isfinite(v) for v in values.values())
    tails_ok = all(np.isfinite(t) and t < TAIL_TOLERANCE for t in tails.values())
    passed = bool(finite and tails_ok and v0.positive())
    bounded = [v for v in values.values() if np.isfinite(v)]
    K = max(bounded) if passed else np.inf
    notes = [
        f"gradient integrability checked for p in {list(p_list)} only; "
        "exponential decay of v0 is what extends it to every p >= 2"
    ]
    if not v0.positive():
        notes.append("v0 is not strictly positive")
    return HypothesisReport(K, values, tails, passed, p_list, notes)
