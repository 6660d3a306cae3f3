"""Named initial-data fixtures shipped with the package."""

from __future__ import annotations

from .initial_data import CompactBump, Constant, Gaussian, GaussianPos, InitialDataSpec, Sech, Zero

FIXTURES = {
    "gaussian": InitialDataSpec(Gaussian(1.0, 1.0), Sech(1.0, 1.0)),
    "bump": InitialDataSpec(CompactBump(1.0, 1.5), GaussianPos(1.0, 2.0)),
    "heat": InitialDataSpec(Zero(), Sech(1.0, 1.0)),
    # spatially constant state; its solution is the logistic ODE pair
    "homogeneous": InitialDataSpec(Constant(1.0), Constant(1.0), Zero(), hypothesis_exempt=True),
}


def get_fixture(name: str) -> InitialDataSpec:
    try:
        return FIXTURES[name]
    except KeyError:
        raise ValueError(f"unknown fixture {name!r}; expected one of {sorted(FIXTURES)}") from None
