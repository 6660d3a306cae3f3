"""Finite-volume simulation and estimate checks for a 1D doubly degenerate nutrient-taxis system."""

from .cutoff import Cutoff, eval_cutoff, make_cutoff
from .fixtures import FIXTURES, get_fixture
from .functionals import FunctionalSample, MonitorConfig, evaluate_monitors
from .grid import Grid, gradient, integrate, lp_norm, make_grid
from .initial_data import InitialDataSpec, build_initial, validate_hypotheses
from .solver import PositivityViolation, SolverParams, State, Trajectory, simulate, step

__version__ = "0.1.0"

__all__ = [
    "Cutoff",
    "FIXTURES",
    "FunctionalSample",
    "Grid",
    "InitialDataSpec",
    "MonitorConfig",
    "PositivityViolation",
    "SolverParams",
    "State",
    "Trajectory",
    "build_initial",
    "eval_cutoff",
    "evaluate_monitors",
    "get_fixture",
    "gradient",
    "integrate",
    "lp_norm",
    "make_cutoff",
    "make_grid",
    "simulate",
    "step",
    "validate_hypotheses",
]
