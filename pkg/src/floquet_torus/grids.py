"""Uniform grids on flat tori, weighted Lebesgue norms, and x1-frequency analysis.

The torus is T^n = R^n / 2*pi*Z^n sampled at N equispaced nodes per axis,
x = 2*pi*(i_1, ..., i_n)/N.  Trapezoidal quadrature on this grid integrates
trigonometric polynomials of degree < N exactly, which is what makes every
norm and inner product below spectrally accurate for band-limited data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class TorusGrid:
    """Equispaced tensor grid on T^dim with N nodes per axis (N even)."""

    dim: int
    points_per_axis: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"grid dimension must be >= 1, got {self.dim}")
        n = self.points_per_axis
        if n < 2 or n % 2 != 0:
            raise ValueError(f"points_per_axis must be an even integer >= 2, got {n}")

    @property
    def spacing(self) -> float:
        return TWO_PI / self.points_per_axis

    @property
    def shape(self) -> tuple:
        return (self.points_per_axis,) * self.dim

    @property
    def node_count(self) -> int:
        return self.points_per_axis ** self.dim

    @property
    def quad_weight(self) -> float:
        """Trapezoidal weight per node, (2*pi/N)^dim."""
        return self.spacing ** self.dim

    def axis_coordinates(self) -> np.ndarray:
        return TWO_PI * np.arange(self.points_per_axis) / self.points_per_axis

    def coordinate(self, axis: int) -> np.ndarray:
        """Coordinate x_axis broadcast over the full grid shape."""
        x = self.axis_coordinates()
        shape = [1] * self.dim
        shape[axis] = self.points_per_axis
        return np.broadcast_to(x.reshape(shape), self.shape)

    def meshgrid(self) -> list:
        return [self.coordinate(a) for a in range(self.dim)]

    def frequencies(self) -> np.ndarray:
        """Integer DFT frequencies per axis in FFT order: 0, 1, ..., -1."""
        return np.fft.fftfreq(self.points_per_axis, d=1.0 / self.points_per_axis).astype(int)

    def transverse(self) -> "TorusGrid":
        """Grid for the last dim-1 axes (the x' torus)."""
        if self.dim < 2:
            raise ValueError("no transverse grid below dimension 2")
        return TorusGrid(self.dim - 1, self.points_per_axis)


def _as_weight(grid: TorusGrid, weight) -> np.ndarray:
    if weight is None:
        return np.ones(grid.shape)
    w = np.asarray(weight, dtype=float)
    if w.shape != grid.shape:
        raise ValueError(f"weight shape {w.shape} does not match grid shape {grid.shape}")
    if not np.all(w > 0):
        raise ValueError("weight must be strictly positive at every node")
    return w


@dataclass
class GridFunction:
    """Complex samples on a TorusGrid with a positive quadrature weight.

    The weight holds the Riemannian density sqrt(det g), so every norm and
    inner product is taken with respect to the volume element it encodes.
    """

    grid: TorusGrid
    values: np.ndarray
    weight: np.ndarray = field(default=None)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid shape {self.grid.shape}"
            )
        self.weight = _as_weight(self.grid, self.weight)

    def copy_with(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.grid, values, self.weight)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return self.copy_with(self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return self.copy_with(self.values - other.values)


def constant_function(grid: TorusGrid, value=1.0, weight=None) -> GridFunction:
    return GridFunction(grid, np.full(grid.shape, value, dtype=complex), weight)


def _check_finite(values: np.ndarray, grid: TorusGrid):
    bad = ~np.isfinite(values)
    if bad.any():
        idx = np.argwhere(bad)[0]
        raise ValueError(
            f"non-finite sample {values[tuple(idx)]} at node {tuple(int(i) for i in idx)}"
        )


def lebesgue_norm(f: GridFunction, p: float) -> float:
    """Weighted discrete L^p norm, (sum |f|^p * weight * quad_weight)^(1/p)."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    _check_finite(f.values, f.grid)
    total = np.sum(np.abs(f.values) ** p * f.weight) * f.grid.quad_weight
    return float(total ** (1.0 / p))


def weighted_inner(f: GridFunction, g: GridFunction) -> complex:
    """<f, g> = int f conj(g) weight dx via trapezoidal quadrature."""
    _check_finite(f.values, f.grid)
    _check_finite(g.values, g.grid)
    return complex(np.sum(f.values * np.conj(g.values) * f.weight) * f.grid.quad_weight)


def x1_fourier_modes(f: GridFunction) -> dict:
    """Fourier modes of f with respect to x1: f_j(x') = (1/2pi) int f e^(-i j y1) dy1.

    Returns a map j -> GridFunction on the transverse grid, for every DFT
    frequency j of the grid (including the Nyquist index -N/2, so that
    reassembly and Parseval hold to roundoff for arbitrary samples).
    """
    _check_finite(f.values, f.grid)
    n = f.grid.points_per_axis
    coeffs = np.fft.fft(f.values, axis=0) / n
    freqs = f.grid.frequencies()
    if f.grid.dim == 1:
        return {int(j): complex(coeffs[idx]) for idx, j in enumerate(freqs)}
    tgrid = f.grid.transverse()
    # weight of the product-form density is x1-independent; take the x1 average
    # so a constant extension reproduces it exactly.
    tweight = f.weight.mean(axis=0)
    return {int(j): GridFunction(tgrid, coeffs[idx], tweight) for idx, j in enumerate(freqs)}


def assemble_from_x1_modes(modes: dict, grid: TorusGrid, weight=None) -> GridFunction:
    """Inverse of x1_fourier_modes: f = sum_j e^(i j x1) f_j(x')."""
    n = grid.points_per_axis
    coeffs = np.zeros(grid.shape, dtype=complex)
    freqs = list(grid.frequencies())
    for j, fj in modes.items():
        idx = freqs.index(int(j))
        coeffs[idx] = fj.values if isinstance(fj, GridFunction) else fj
    values = np.fft.ifft(coeffs * n, axis=0)
    return GridFunction(grid, values, weight)


@dataclass(frozen=True)
class FrequencyBlock:
    """Dyadic x1-frequency block: nu = 0 holds {0}, nu >= 1 holds 2^(nu-1) <= |j| < 2^nu."""

    nu: int

    def contains(self, j: int) -> bool:
        if self.nu == 0:
            return j == 0
        return 2 ** (self.nu - 1) <= abs(j) < 2 ** self.nu

    def j_range(self) -> list:
        if self.nu == 0:
            return [0]
        lo, hi = 2 ** (self.nu - 1), 2 ** self.nu
        return list(range(-hi + 1, -lo + 1)) + list(range(lo, hi))


def block_of(j: int) -> FrequencyBlock:
    """The unique dyadic block containing frequency j."""
    if j == 0:
        return FrequencyBlock(0)
    return FrequencyBlock(int(np.floor(np.log2(abs(j)))) + 1)


def lp_decompose(f: GridFunction) -> list:
    """Littlewood-Paley split of f along x1: pieces f_nu supported on dyadic blocks.

    The pieces sum back to f exactly (the blocks partition the DFT frequencies).
    Returns [(FrequencyBlock, GridFunction), ...] for the blocks with nonzero
    frequency content on this grid, in increasing nu.
    """
    _check_finite(f.values, f.grid)
    n = f.grid.points_per_axis
    coeffs = np.fft.fft(f.values, axis=0)
    freqs = f.grid.frequencies()
    nu_max = block_of(n // 2).nu
    pieces = []
    for nu in range(nu_max + 1):
        block = FrequencyBlock(nu)
        mask = np.array([block.contains(int(j)) for j in freqs])
        if not mask.any():
            continue
        sel = np.zeros_like(coeffs)
        sel[mask] = coeffs[mask]
        values = np.fft.ifft(sel, axis=0)
        pieces.append((block, f.copy_with(values)))
    return pieces


def spectral_derivative(values: np.ndarray, axis: int, grid: TorusGrid) -> np.ndarray:
    """D_axis f = -i d/dx_axis f via the FFT (exact for band-limited samples)."""
    freqs = grid.frequencies()
    shape = [1] * values.ndim
    shape[axis] = len(freqs)
    k = freqs.reshape(shape)
    spec = np.fft.fft(values, axis=axis)
    return np.fft.ifft(k * spec, axis=axis)


def gridfunction_to_rows(f: GridFunction) -> list:
    """CSV rows (i_1, ..., i_n, re, im) in C-order."""
    rows = []
    for idx in np.ndindex(*f.grid.shape):
        v = f.values[idx]
        rows.append(list(idx) + [float(v.real), float(v.imag)])
    return rows


def gridfunction_from_rows(rows: list, grid: TorusGrid, weight=None) -> GridFunction:
    values = np.zeros(grid.shape, dtype=complex)
    for row in rows:
        idx = tuple(int(i) for i in row[: grid.dim])
        values[idx] = float(row[grid.dim]) + 1j * float(row[grid.dim + 1])
    return GridFunction(grid, values, weight)


def gridfunction_to_json(f: GridFunction) -> dict:
    return {
        "grid": {"dim": f.grid.dim, "points_per_axis": f.grid.points_per_axis},
        "re": f.values.real.ravel().tolist(),
        "im": f.values.imag.ravel().tolist(),
        "weight": f.weight.ravel().tolist(),
    }


def gridfunction_from_json(doc: dict) -> GridFunction:
    grid = TorusGrid(doc["grid"]["dim"], doc["grid"]["points_per_axis"])
    values = np.asarray(doc["re"], dtype=float).reshape(grid.shape) + 1j * np.asarray(
        doc["im"], dtype=float
    ).reshape(grid.shape)
    weight = np.asarray(doc["weight"], dtype=float).reshape(grid.shape)
    return GridFunction(grid, values, weight)


def matrix_to_rows(matrix: np.ndarray) -> list:
    """CSV export schema for dense operator matrices: (row, col, re, im)."""
    rows = []
    m = np.asarray(matrix)
    for r in range(m.shape[0]):
        for c in range(m.shape[1]):
            v = complex(m[r, c])
            rows.append([r, c, v.real, v.imag])
    return rows
