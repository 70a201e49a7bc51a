"""Discrete Floquet-Bloch-Gelfand transform, band structure, and the Thomas scan.

The transform maps a function on the supercell [0, 2 pi P)^n to P^n fibers on
T^n indexed by quasimomenta theta = l/P; on this dual lattice it is an exact
unitary (a DFT across cells), and the full-space form decomposes as the fiber
average of the shifted forms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import TWO_PI, GridFunction, TorusGrid
from .modes import TensorModeSpace
from .operators import FullMetric, build_floquet_matrix, evaluate_form
from .estimates import sigma_min_x1_profile, _x1_profile_if_separable


@dataclass
class SupercellFunction:
    """Samples on [0, 2 pi P)^n with N points per cell axis (shape (P N)^n)."""

    cells_per_axis: int
    cell_points: int
    values: np.ndarray

    def __post_init__(self):
        p, n = self.cells_per_axis, self.cell_points
        self.values = np.asarray(self.values, dtype=complex)
        dim = self.values.ndim
        if self.values.shape != (p * n,) * dim:
            raise ValueError(f"supercell shape {self.values.shape} != {(p * n,) * dim}")

    @property
    def dim(self) -> int:
        return self.values.ndim

    def cell_grid(self) -> TorusGrid:
        return TorusGrid(self.dim, self.cell_points)

    def norm2(self, cell_weight=None) -> float:
        w = 1.0 if cell_weight is None else np.tile(cell_weight, (self.cells_per_axis,) * self.dim)
        quad = (TWO_PI / self.cell_points) ** self.dim
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2 * w) * quad))


@dataclass
class BlochField:
    """Fibers v(theta_l, x) on the dual grid theta_l = l/P, l in {0..P-1}^n.

    The continuum wrap condition v(theta + e_a, x) = e^(-i x_a) v(theta, x)
    is an extension convention here: fiber() applies it for indices outside
    the fundamental grid.
    """

    cells_per_axis: int
    cell_points: int
    fibers: np.ndarray  # shape (P,)*dim + (N,)*dim

    def __post_init__(self):
        self.fibers = np.asarray(self.fibers, dtype=complex)
        p, n = self.cells_per_axis, self.cell_points
        dim = self.fibers.ndim // 2
        if self.fibers.shape != (p,) * dim + (n,) * dim:
            raise ValueError(f"fiber array shape {self.fibers.shape} != {(p,) * dim + (n,) * dim}")

    @property
    def dim(self) -> int:
        return self.fibers.ndim // 2

    def cell_grid(self) -> TorusGrid:
        return TorusGrid(self.dim, self.cell_points)

    def theta(self, l) -> np.ndarray:
        return np.asarray(l, dtype=float) / self.cells_per_axis

    def fiber(self, l) -> np.ndarray:
        """Fiber at integer multi-index l, quasiperiodically extended."""
        l = np.asarray(l, dtype=int)
        p = self.cells_per_axis
        base = self.fibers[tuple(l % p)]
        wraps = l // p
        grid = self.cell_grid()
        phase = np.ones(grid.shape, dtype=complex)
        for a, w in enumerate(wraps):
            if w:
                phase = phase * np.exp(-1j * w * grid.coordinate(a))
        return base * phase


def gelfand_forward(u: SupercellFunction) -> BlochField:
    """(Uu)(theta, x) = e^(-i x.theta) sum_c e^(-2 pi i c.theta) u(x + 2 pi c)."""
    if not np.all(np.isfinite(u.values)):
        raise ValueError("supercell samples must be finite")
    p, n, dim = u.cells_per_axis, u.cell_points, u.dim
    # split each axis into (cell, intracell): global = cell * N + intra
    work = u.values.reshape(sum(((p, n) for _ in range(dim)), ()))
    cell_axes = tuple(2 * a for a in range(dim))
    hat = np.fft.fftn(work, axes=cell_axes)  # sum_c e^(-2 pi i c l / P)
    order = cell_axes + tuple(2 * a + 1 for a in range(dim))
    hat = np.transpose(hat, order)  # (P,)*dim + (N,)*dim
    grid = TorusGrid(dim, n)
    for a in range(dim):
        l = np.arange(p).reshape((1,) * a + (p,) + (1,) * (2 * dim - a - 1))
        x = grid.axis_coordinates().reshape((1,) * (dim + a) + (n,) + (1,) * (dim - a - 1))
        hat = hat * np.exp(-1j * x * l / p)
    return BlochField(cells_per_axis=p, cell_points=n, fibers=hat)


def gelfand_inverse(v, tolerance: float = 1e-10) -> SupercellFunction:
    """(U* v)(x) = average over theta of e^(i x.theta) v(theta, x).

    Accepts a BlochField, or a raw fiber array; an extended array with P+1
    entries per theta axis has its wrap fibers checked against the
    quasiperiodic extension and is rejected with the maximum violation.
    """
    if not isinstance(v, BlochField):
        arr = np.asarray(v, dtype=complex)
        dim = arr.ndim // 2
        pext, n = arr.shape[0], arr.shape[-1]
        if pext >= 2 and arr.shape[: dim] == (pext,) * dim and pext - 1 >= 1:
            p = pext - 1
            grid = TorusGrid(dim, n)
            base = arr[(slice(0, p),) * dim]
            worst = 0.0
            for a in range(dim):
                sel = [slice(0, p)] * dim
                sel[a] = p  # the wrap fiber claimed at theta_a = 1
                claimed = arr[tuple(sel)]
                ref = base[tuple(0 if b == a else slice(None) for b in range(dim))]
                phase = np.exp(-1j * grid.coordinate(a))
                viol = np.max(np.abs(claimed - ref * phase))
                worst = max(worst, float(viol))
            if worst > tolerance:
                raise ValueError(
                    f"input is not quasiperiodic: max wrap violation {worst:.3e} "
                    f"exceeds {tolerance:.1e}"
                )
            v = BlochField(cells_per_axis=p, cell_points=n, fibers=base)
        else:
            raise ValueError(
                "raw input must carry extended wrap fibers (P+1 per theta axis) "
                "for the quasiperiodicity check; pass a BlochField otherwise"
            )
    p, n, dim = v.cells_per_axis, v.cell_points, v.dim
    grid = v.cell_grid()
    work = v.fibers.copy()
    for a in range(dim):
        l = np.arange(p).reshape((1,) * a + (p,) + (1,) * (2 * dim - a - 1))
        x = grid.axis_coordinates().reshape((1,) * (dim + a) + (n,) + (1,) * (dim - a - 1))
        work = work * np.exp(1j * x * l / p)
    cells = np.fft.ifftn(work, axes=tuple(range(dim)))  # (1/P^n) sum_l e^(+2 pi i c l/P)
    order = []
    for a in range(dim):
        order.extend([a, dim + a])
    interleaved = np.transpose(cells, order)
    values = interleaved.reshape((p * n,) * dim)
    return SupercellFunction(cells_per_axis=p, cell_points=n, values=values)


def extended_fibers(v: BlochField) -> np.ndarray:
    """Fiber array with the wrap copies appended (P+1 per theta axis)."""
    p, dim = v.cells_per_axis, v.dim
    out = v.fibers
    grid = v.cell_grid()
    for a in range(dim):
        first = np.take(out, [0], axis=a)
        phase = np.exp(-1j * grid.coordinate(a))
        out = np.concatenate([out, first * phase], axis=a)
    return out


def bloch_isometry_defect(u: SupercellFunction, cell_weight=None) -> float:
    """| ||Uu||^2 - ||u||^2 | / ||u||^2 with the theta-averaged fiber norms."""
    v = gelfand_forward(u)
    p, dim = u.cells_per_axis, u.dim
    w = 1.0 if cell_weight is None else cell_weight
    quad = (TWO_PI / u.cell_points) ** dim
    fiber_axes = tuple(range(dim, 2 * dim))
    fiber_norms = np.sum(np.abs(v.fibers) ** 2 * w, axis=fiber_axes) * quad
    total = float(fiber_norms.mean())
    direct = u.norm2(cell_weight) ** 2
    return abs(total - direct) / direct


# ---------------------------------------------------------------------------
# supercell spectral calculus (frequencies k/P on the long torus)
# ---------------------------------------------------------------------------


def supercell_derivative(values: np.ndarray, axis: int, cells_per_axis: int) -> np.ndarray:
    total = values.shape[axis]
    freqs = np.fft.fftfreq(total, d=1.0 / total) / cells_per_axis
    shape = [1] * values.ndim
    shape[axis] = total
    spec = np.fft.fft(values, axis=axis)
    return np.fft.ifft(freqs.reshape(shape) * spec, axis=axis)


def supercell_apply(u: SupercellFunction, metric: FullMetric, q) -> SupercellFunction:
    """H u on the supercell with per-cell-periodic coefficients (theta = 0)."""
    p, dim = u.cells_per_axis, u.dim
    tiles = (p,) * dim
    w = np.tile(metric.density, tiles)
    out = np.zeros_like(u.values)
    flux = [supercell_derivative(u.values, k, p) for k in range(dim)]
    for j in range(dim):
        s = np.zeros_like(u.values)
        for k in range(dim):
            gjk = metric.inverse_entry(j, k)
            if np.any(gjk != 0):
                s += np.tile(gjk, tiles) * flux[k]
        out += supercell_derivative(s * w, j, p)
    out /= w
    if q is not None:
        qv = q.values if isinstance(q, GridFunction) else q
        out = out + np.tile(qv, tiles) * u.values
    return SupercellFunction(p, u.cell_points, out)


def supercell_form(u: SupercellFunction, metric: FullMetric, q) -> complex:
    """h[u, u] on the supercell with per-cell-periodic coefficients."""
    p, dim = u.cells_per_axis, u.dim
    tiles = (p,) * dim
    w = np.tile(metric.density, tiles)
    quad = (TWO_PI / u.cell_points) ** dim
    du = [supercell_derivative(u.values, a, p) for a in range(dim)]
    total = 0.0 + 0.0j
    for j in range(dim):
        for k in range(dim):
            gjk = metric.inverse_entry(j, k)
            if np.any(gjk != 0):
                total += np.sum(np.tile(gjk, tiles) * du[k] * np.conj(du[j]) * w)
    if q is not None:
        qv = q.values if isinstance(q, GridFunction) else q
        total += np.sum(np.tile(qv, tiles) * np.abs(u.values) ** 2 * w)
    return complex(total * quad)


def direct_integral_check(u: SupercellFunction, metric: FullMetric, q) -> float:
    """Residual of h[u,u] = average over theta of h(theta)[(Uu)(theta), .]."""
    v = gelfand_forward(u)
    p, dim = u.cells_per_axis, u.dim
    grid = v.cell_grid()
    total = 0.0 + 0.0j
    for l in np.ndindex(*(p,) * dim):
        theta = np.asarray(l, dtype=float) / p
        fiber = GridFunction(grid, v.fibers[l], metric.density)
        total += evaluate_form(fiber, fiber, metric, q, theta)
    fiber_avg = total / p**dim
    direct = supercell_form(u, metric, q)
    return abs(direct - fiber_avg) / abs(direct)


# ---------------------------------------------------------------------------
# band structure and the Thomas injectivity scan
# ---------------------------------------------------------------------------


def band_structure(metric: FullMetric, q, theta_path, bands: int, truncation: int = 4) -> list:
    """Ascending eigenvalues of H(theta) along a path of real quasimomenta.

    Returns rows (theta tuple, [lambda_1 ... lambda_bands]) with complex
    entries (imaginary parts vanish for real q up to roundoff).
    """
    rows = []
    for theta in theta_path:
        theta = np.asarray(theta, dtype=float)
        fm = build_floquet_matrix(metric, q, theta, truncation)
        eigs = fm.eigenvalues()
        eigs = eigs[np.argsort(eigs.real, kind="stable")][:bands]
        rows.append((tuple(theta), np.asarray(eigs, dtype=complex)))
    return rows


@dataclass
class ThomasScanResult:
    rows: list  # (tau, sigma_min)
    onset_tau: float  # first tau with a growing positive margin, nan if none
    inconclusive: list  # taus where sigma_min is numerically zero
    j_cut: int
    k_count: int


def thomas_scan(
    space: TensorModeSpace,
    q,
    tau_list,
    j_cut: int = 24,
    x1_bandwidth: int = 0,
    k_indices=None,
    margin: float = 0.5,
    zero_tol: float = 1e-10,
) -> ThomasScanResult:
    """sigma_min of the truncated H(theta_tau) per tau, with the empirical onset.

    A sigma_min below zero_tol is reported as inconclusive, never as a kernel
    certificate: the truncation cannot witness a continuum kernel.
    """
    from .operators import build_tensor_floquet_matrix

    qv = None if q is None else (q.values if isinstance(q, GridFunction) else q)
    rows = []
    inconclusive = []
    taus = sorted(float(t) for t in tau_list)
    for tau in taus:
        if qv is None:
            profile = np.zeros(space.grid.points_per_axis)
        else:
            profile = _x1_profile_if_separable(qv)
        if profile is not None and k_indices is None:
            sigma = sigma_min_x1_profile(profile, space.lam, tau, j_cut, x1_bandwidth)
            k_count = len(np.unique(space.lam))
        else:
            tm = build_tensor_floquet_matrix(space, qv, 0.5 + 1j * tau, j_cut, k_indices)
            sigma = tm.inner_block_sigma_min(pad=x1_bandwidth)
            k_count = tm.k_count
        rows.append((tau, float(sigma)))
        if sigma < zero_tol:
            inconclusive.append(tau)
    onset = float("nan")
    for i, (tau, sigma) in enumerate(rows):
        later = [s for _, s in rows[i:]]
        if sigma > margin and all(b >= a * 0.999 for a, b in zip(later, later[1:])):
            onset = tau
            break
    return ThomasScanResult(
        rows=rows,
        onset_tau=onset,
        inconclusive=inconclusive,
        j_cut=j_cut,
        k_count=k_count,
    )
