"""Periodic potentials and conformal factors as sampled fields."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import TWO_PI, GridFunction, TorusGrid


@dataclass
class TrigPolynomial:
    """Real trigonometric polynomial: const + sum amp * cos(mode . x + phase)."""

    const: float = 0.0
    terms: list = field(default_factory=list)  # (amp, mode tuple, phase)

    @property
    def bandwidth(self) -> int:
        if not self.terms:
            return 0
        return max(int(np.max(np.abs(mode))) for _, mode, _ in self.terms)

    def sample(self, grid: TorusGrid) -> np.ndarray:
        values = np.full(grid.shape, float(self.const))
        for amp, mode, phase in self.terms:
            arg = np.full(grid.shape, float(phase))
            for a, m in enumerate(mode):
                if m:
                    arg = arg + m * grid.coordinate(a)
            values = values + amp * np.cos(arg)
        return values

    def sup_norm_bound(self) -> float:
        return abs(self.const) + sum(abs(a) for a, _, _ in self.terms)

    def as_gridfunction(self, grid: TorusGrid, weight=None) -> GridFunction:
        return GridFunction(grid, self.sample(grid).astype(complex), weight)


@dataclass
class PeriodizedPowerSingularity:
    """q(x) = amplitude * dist(x, center)^(-alpha) with the torus distance.

    alpha < 2 keeps q in L^(n/2)(T^3).  The nearest-image distance is the
    correct periodization here; the literal lattice-image sum diverges for
    alpha < n.
    """

    alpha: float
    center: tuple
    amplitude: float = 1.0

    def __post_init__(self):
        if not (0 < self.alpha < 2):
            raise ValueError(
                f"singular exponent alpha={self.alpha} not admissible: need 0 < alpha < 2 "
                "to keep the potential in L^(n/2)"
            )

    def sample(self, grid: TorusGrid) -> np.ndarray:
        d2 = np.zeros(grid.shape)
        for a in range(grid.dim):
            delta = np.mod(grid.coordinate(a) - self.center[a] + np.pi, TWO_PI) - np.pi
            d2 = d2 + delta**2
        dist = np.sqrt(d2)
        if np.any(dist == 0):
            raise ValueError(
                "grid node coincides with the singular center; offset the center "
                "by half a cell"
            )
        return self.amplitude * dist ** (-self.alpha)

    def as_gridfunction(self, grid: TorusGrid, weight=None) -> GridFunction:
        return GridFunction(grid, self.sample(grid).astype(complex), weight)


def half_cell_offset_center(grid: TorusGrid) -> tuple:
    """A singular center half a grid cell away from every node."""
    return tuple(grid.spacing / 2.0 for _ in range(grid.dim))
