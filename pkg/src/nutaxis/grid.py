"""Uniform cell-centered grid on the ball (-1/eps, 1/eps) and its kernels.

All integrals in the package go through :func:`integrate` (midpoint rule) and
all derivatives of cell fields through :func:`gradient`, so discrete
identities stay consistent between the solver and the monitors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MIN_CELLS = 8


@dataclass(frozen=True)
class Grid:
    """Cell-centered mesh of ``B_{1/epsilon}`` with ``n_cells`` equal cells."""

    epsilon: float
    n_cells: int
    half_length: float = field(init=False)
    dx: float = field(init=False)
    centers: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        half = 1.0 / self.epsilon
        dx = 2.0 * half / self.n_cells
        centers = -half + (np.arange(self.n_cells) + 0.5) * dx
        # exact symmetry about 0 (rounding in -half + ... is not symmetric)
        centers = 0.5 * (centers - centers[::-1])
        centers.setflags(write=False)
        object.__setattr__(self, "half_length", half)
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "centers", centers)

    @property
    def faces(self) -> np.ndarray:
        return -self.half_length + np.arange(self.n_cells + 1) * self.dx

    def check_field(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != (self.n_cells,):
            raise ValueError(
                f"field of shape {f.shape} does not live on a grid of {self.n_cells} cells"
            )
        if not np.all(np.isfinite(f)):
            raise ValueError("field has non-finite entries")
        return f


def make_grid(epsilon: float, n_cells: int) -> Grid:
    """Build the grid of ``B_{1/epsilon}``.

    Raises ``ValueError`` if ``epsilon`` is outside (0, 1] or ``n_cells`` is
    odd or smaller than 8.
    """
    epsilon = float(epsilon)
    if not (0.0 < epsilon <= 1.0) or not np.isfinite(epsilon):
        raise ValueError(f"epsilon out of range (0, 1]: {epsilon}")
    if int(n_cells) != n_cells:
        raise ValueError(f"n_cells must be an integer, got {n_cells}")
    n_cells = int(n_cells)
    if n_cells < MIN_CELLS or n_cells % 2:
        raise ValueError(f"n_cells must be even and >= {MIN_CELLS}, got {n_cells}")
    return Grid(epsilon, n_cells)


def integrate(f, grid: Grid) -> float:
    """Midpoint quadrature ``sum_i f_i dx`` over the ball."""
    f = grid.check_field(f)
    return float(np.sum(f) * grid.dx)


def gradient(f, grid: Grid, boundary: str = "reflect") -> np.ndarray:
    """Centered difference of a cell field.

    Interior cells use ``(f[i+1] - f[i-1]) / (2 dx)``. At the two end cells
    ``boundary="reflect"`` uses the mirror ghost value (the zero-flux
    extension, so the derivative vanishes on the boundary face) and
    ``boundary="one_sided"`` uses the second-order one-sided stencil.
    """
    f = grid.check_field(f)
    dx = grid.dx
    g = np.empty_like(f)
    g[1:-1] = (f[2:] - f[:-2]) / (2.0 * dx)
    if boundary == "reflect":
        g[0] = (f[1] - f[0]) / (2.0 * dx)
        g[-1] = (f[-1] - f[-2]) / (2.0 * dx)
    elif boundary == "one_sided":
        g[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx)
        g[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * dx)
    else:
        raise ValueError(f"unknown boundary treatment {boundary!r}")
    return g


def lp_norm(f, grid: Grid, m: float) -> float:
    """``(integrate |f|^m)^(1/m)``; ``m = inf`` gives the sampled sup norm."""
    f = grid.check_field(f)
    if np.isinf(m):
        return float(np.max(np.abs(f)))
    return integrate(np.abs(f) ** m, grid) ** (1.0 / m)
