"""The Floquet operator family H(theta) and the Thomas-shifted H0(theta_tau).

H(theta) = |g|^(-1/2) (D_j + theta_j)(|g|^(1/2) g^{jk} (D_k + theta_k)) + q
acting on T^n, built either as a Fourier-Galerkin matrix (any metric) or in
the tensor-mode representation (product metrics, where the free part is
diagonal).  The sesquilinear form, a coercivity scan, and the conformal
gauge reduction q -> q_c live here too.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .grids import TWO_PI, GridFunction, TorusGrid, spectral_derivative
from .modes import TensorModeSpace, mode_eigenvalue
from .transverse import TransverseMetric, flat_metric

C1_GRID_STEP = 2.0 **-16
C1_CAP = 2.0 ** 20


@dataclass(frozen=True)
class ShiftParameters:
    """Complex quasimomentum theta and the Thomas shift parameter tau."""

    theta: tuple
    tau: float = 0.0

    @classmethod
    def thomas(cls, tau: float, dim: int) -> "ShiftParameters":
        theta = (0.5 + 1j * tau,) + (0.0,) * (dim - 1)
        return cls(theta=theta, tau=float(tau))

    @property
    def dim(self) -> int:
        return len(self.theta)


@dataclass
class FullMetric:
    """Transversal product metric g = c(x) * (dx1^2 + g0(x')) on T^n."""

    grid: TorusGrid
    conformal_factor: np.ndarray
    transverse: TransverseMetric
    bandwidth: int = 0
    density: np.ndarray = field(default=None)

    def __post_init__(self):
        c = np.broadcast_to(np.asarray(self.conformal_factor, dtype=float), self.grid.shape)
        if np.any(c <= 0):
            raise ValueError("conformal factor must be strictly positive")
        self.conformal_factor = c.copy()
        if self.transverse.grid.points_per_axis != self.grid.points_per_axis:
            raise ValueError("transverse metric resolution does not match the grid")
        n = self.grid.dim
        rho = self.transverse.density  # |g0|^(1/2) on the transverse grid
        expected = c ** (n / 2.0) * rho[None, ...]
        if self.density is None:
            self.density = expected
        elif not np.allclose(self.density, expected, atol=1e-12):
            raise ValueError("density inconsistent with c^(n/2) |g0|^(1/2)")

    def inverse_entry(self, j: int, k: int) -> np.ndarray:
        """g^{jk} on the full grid: c^(-1) diag(1, g0^{-1})."""
        cinv = 1.0 / self.conformal_factor
        if j == 0 and k == 0:
            return cinv
        if j == 0 or k == 0:
            return np.zeros(self.grid.shape)
        entry = self.transverse.inverse_components[j - 1, k - 1]
        return cinv * entry[None, ...]

    def total_bandwidth(self) -> int:
        return self.bandwidth + self.transverse.bandwidth


def flat_full_metric(grid: TorusGrid) -> FullMetric:
    return FullMetric(grid, np.ones(grid.shape), flat_metric(grid.transverse()))


def product_metric(grid: TorusGrid, transverse: TransverseMetric) -> FullMetric:
    return FullMetric(grid, np.ones(grid.shape), transverse)


def mu(j: int, k: int, tau: float, basis) -> complex:
    """(j + 1/2)^2 + 2 i tau (j + 1/2) - tau^2 + lambda_k for mode (j, k)."""
    lam = np.asarray(basis.eigenvalues, dtype=float)
    if k >= len(lam):
        raise IndexError(f"mode index {k} outside basis of size {len(lam)}")
    return complex(mode_eigenvalue(j, lam[k], tau))


# ---------------------------------------------------------------------------
# spectral application of the operator and the sesquilinear form
# ---------------------------------------------------------------------------


def apply_operator(values: np.ndarray, metric: FullMetric, q, theta) -> np.ndarray:
    """H(theta) f by spectral differentiation, exact for resolved data."""
    grid = metric.grid
    n = grid.dim
    theta = np.asarray(theta, dtype=complex)
    w = metric.density
    flux = []
    for k in range(n):
        tk = spectral_derivative(values, k, grid) + theta[k] * values
        flux.append(tk)
    out = np.zeros(grid.shape, dtype=complex)
    for j in range(n):
        s = np.zeros(grid.shape, dtype=complex)
        for k in range(n):
            gjk = metric.inverse_entry(j, k)
            if np.any(gjk != 0):
                s += gjk * flux[k]
        s *= w
        out += spectral_derivative(s, j, grid) + theta[j] * s
    out /= w
    if q is not None:
        qv = q.values if isinstance(q, GridFunction) else q
        out = out + qv * values
    return out


def laplace_beltrami(values: np.ndarray, metric: FullMetric) -> np.ndarray:
    """-Delta_g f = |g|^(-1/2) D_j (|g|^(1/2) g^{jk} D_k f)."""
    return apply_operator(values, metric, None, np.zeros(metric.grid.dim))


def evaluate_form(u: GridFunction, v: GridFunction, metric: FullMetric, q, theta) -> complex:
    """h(theta)[u, v]: gradient pairing plus the theta cross terms and potential.

    The theta factors multiply conj(v) unconjugated, so for complex theta the
    form is not Hermitian-symmetric, matching the non-self-adjoint family.
    """
    grid = metric.grid
    n = grid.dim
    theta = np.asarray(theta, dtype=complex)
    w = metric.density * grid.quad_weight
    du = [spectral_derivative(u.values, a, grid) + theta[a] * u.values for a in range(n)]
    dv = [np.conj(spectral_derivative(v.values, a, grid)) + theta[a] * np.conj(v.values) for a in range(n)]
    total = 0.0 + 0.0j
    for j in range(n):
        for k in range(n):
            gjk = metric.inverse_entry(j, k)
            if np.any(gjk != 0):
                total += np.sum(gjk * du[k] * dv[j] * w)
    if q is not None:
        qv = q.values if isinstance(q, GridFunction) else q
        total += np.sum(qv * u.values * np.conj(v.values) * w)
    return complex(total)


def h1_norm_squared(u: GridFunction, metric: FullMetric) -> float:
    grid = metric.grid
    w = metric.density * grid.quad_weight
    total = np.sum(np.abs(u.values) ** 2 * w)
    for a in range(grid.dim):
        total += np.sum(np.abs(spectral_derivative(u.values, a, grid)) ** 2 * w)
    return float(total.real)


def coercivity_scan(metric: FullMetric, q, theta, samples: int = 50, seed: int = 0):
    """Empirical Garding pair: Re h(theta)[u,u] >= c0 ||u||_H1^2 - C1 ||u||_2^2.

    Returns the largest dyadic c0 in {1, 1/2, 1/4, ...} and the smallest C1
    on a 2^-16 lattice that certify the inequality over `samples` random
    trigonometric polynomials.  Deterministic given the seed.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    grid = metric.grid
    rng = np.random.default_rng(seed)
    bw = max(1, grid.points_per_axis // 4)
    re_h, h1, l2 = [], [], []
    w = metric.density * grid.quad_weight
    for _ in range(samples):
        values = np.zeros(grid.shape, dtype=complex)
        for _ in range(4):
            mode = rng.integers(-bw, bw + 1, size=grid.dim)
            amp = rng.standard_normal() + 1j * rng.standard_normal()
            phase = np.zeros(grid.shape)
            for a in range(grid.dim):
                phase = phase + mode[a] * grid.coordinate(a)
            values += amp * np.exp(1j * phase)
        u = GridFunction(grid, values, metric.density)
        re_h.append(evaluate_form(u, u, metric, q, theta).real)
        h1.append(h1_norm_squared(u, metric))
        l2.append(float(np.sum(np.abs(values) ** 2 * w).real))
    re_h, h1, l2 = np.asarray(re_h), np.asarray(h1), np.asarray(l2)
    for s in range(0, 60):
        c0 = 2.0 ** (-s)
        needed = np.max((c0 * h1 - re_h) / l2)
        needed = max(0.0, float(needed))
        if needed <= C1_CAP:
            c1 = np.ceil(needed / C1_GRID_STEP) * C1_GRID_STEP
            return c0, float(c1)
    raise RuntimeError("no dyadic c0 certifies coercivity within the C1 cap")


# ---------------------------------------------------------------------------
# conformal gauge reduction
# ---------------------------------------------------------------------------


def conformal_potential(c: GridFunction, q, metric: FullMetric) -> GridFunction:
    """q_c = c q + c^((n+2)/4) (-Delta_g)(c^(-(n-2)/4)) on the grid of `metric`.

    `metric` is the full conformal metric g = c (dx1^2 + g0); the reduction
    removes c so the remaining operator is the product one.
    """
    if np.any(c.values.real <= 0) or np.max(np.abs(c.values.imag)) > 0:
        raise ValueError("conformal factor must be real and strictly positive")
    n = metric.grid.dim
    cv = c.values.real
    lap = laplace_beltrami(cv ** (-(n - 2) / 4.0) + 0.0j, metric)
    qc = cv ** ((n + 2) / 4.0) * lap
    if q is not None:
        qv = q.values if isinstance(q, GridFunction) else q
        qc = qc + cv * qv
    return GridFunction(metric.grid, qc, metric.density)


def verify_conformal_identity(c: GridFunction, q, metric: FullMetric, u: GridFunction) -> float:
    """Residual of c^((n+2)/4)(-Delta_g + q)(c^(-(n-2)/4) u) = (-Delta_prod + q_c) u.

    Returns ||LHS - RHS||_2 / ||u||_2 in the product-metric volume element;
    spectral differentiation keeps this at truncation-error level for
    resolved data.
    """
    grid = metric.grid
    n = grid.dim
    cv = c.values.real
    inner = cv ** (-(n - 2) / 4.0) * u.values
    lhs = laplace_beltrami(inner, metric)
    if q is not None:
        qv = q.values if isinstance(q, GridFunction) else q
        lhs = lhs + qv * inner
    lhs = cv ** ((n + 2) / 4.0) * lhs

    reduced = product_metric(grid, metric.transverse)
    qc = conformal_potential(c, q, metric)
    rhs = laplace_beltrami(u.values, reduced) + qc.values * u.values

    w = reduced.density * grid.quad_weight
    num = np.sqrt(np.sum(np.abs(lhs - rhs) ** 2 * w))
    den = np.sqrt(np.sum(np.abs(u.values) ** 2 * w))
    return float(num / den)


# ---------------------------------------------------------------------------
# Fourier-Galerkin matrix for a general metric
# ---------------------------------------------------------------------------


@dataclass
class FloquetMatrix:
    """H(theta) over plane waves |m|_inf <= truncation, whitened by the mass.

    `matrix` is L^-1 A L^-H where A is the Galerkin form matrix and the mass
    B = L L^H, so its eigenvalues are the generalized pencil eigenvalues and
    Hermitian structure survives for real theta and real q.
    """

    matrix: np.ndarray
    modes: np.ndarray
    theta: np.ndarray
    form_matrix: np.ndarray
    mass_matrix: np.ndarray

    def eigenvalues(self) -> np.ndarray:
        herm = np.max(np.abs(self.matrix - self.matrix.conj().T)) < 1e-10
        if herm:
            return np.linalg.eigvalsh(self.matrix)
        vals = scipy.linalg.eigvals(self.matrix)
        return vals[np.argsort(vals.real, kind="stable")]

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.matrix, compute_uv=False)


def _mode_box(dim: int, m_max) -> np.ndarray:
    cuts = (m_max,) * dim if np.isscalar(m_max) else tuple(m_max)
    axes = [np.arange(-c, c + 1) for c in cuts]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def build_floquet_matrix(metric: FullMetric, q, theta, truncation: int) -> FloquetMatrix:
    """Galerkin matrix of H(theta) on plane waves with |m|_inf <= truncation.

    A[a, b] = h(theta)[e_b, e_a] = (2 pi)^n sum_{jk} (a_j + theta_j)(b_k + theta_k)
    F[g^{jk} w]_{a-b} + (2 pi)^n F[q w]_{a-b}; entries computed from FFT
    tables of the coefficient fields, exact when the grid resolves
    2*truncation + bandwidth.
    """
    grid = metric.grid
    n = grid.dim
    npts = grid.points_per_axis
    theta = np.asarray(theta, dtype=complex)
    if len(theta) != n:
        raise ValueError("theta dimension mismatch")
    max_cut = int(truncation) if np.isscalar(truncation) else int(max(truncation))
    needed = 2 * max_cut + metric.total_bandwidth() + 1
    if npts < needed:
        raise ValueError(
            f"grid resolution {npts} insufficient for truncation {truncation} "
            f"with coefficient bandwidth {metric.total_bandwidth()}; need {needed}"
        )
    modes = _mode_box(n, truncation)
    diff = modes[:, None, :] - modes[None, :, :]
    idx = tuple(diff[..., a] % npts for a in range(n))
    vol = TWO_PI ** n
    w = metric.density

    mass = vol * (np.fft.fftn(w) / grid.node_count)[idx]
    A = np.zeros_like(mass)
    af = modes.astype(float)
    for j in range(n):
        for k in range(n):
            gjk = metric.inverse_entry(j, k)
            if not np.any(gjk != 0):
                continue
            table = vol * (np.fft.fftn(gjk * w) / grid.node_count)[idx]
            A = A + np.multiply.outer(af[:, j] + theta[j], af[:, k] + theta[k]) * table
    if q is not None:
        qv = q.values if isinstance(q, GridFunction) else q
        A = A + vol * (np.fft.fftn(qv * w) / grid.node_count)[idx]

    mass = 0.5 * (mass + mass.conj().T)
    L = np.linalg.cholesky(mass)
    Linv = scipy.linalg.solve_triangular(L, np.eye(len(mass), dtype=complex), lower=True)
    matrix = Linv @ A @ Linv.conj().T
    return FloquetMatrix(matrix=matrix, modes=modes, theta=theta, form_matrix=A, mass_matrix=mass)


# ---------------------------------------------------------------------------
# tensor-mode matrix for product metrics
# ---------------------------------------------------------------------------


@dataclass
class TensorFloquetMatrix:
    """H(theta) over tensor modes (j, k): diagonal free symbol plus potential block."""

    matrix: np.ndarray
    j_list: np.ndarray
    k_count: int
    theta1: complex
    diagonal: np.ndarray
    potential_block: np.ndarray

    def index(self, j: int, k: int) -> int:
        return int(np.nonzero(self.j_list == j)[0][0]) * self.k_count + k

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.matrix, compute_uv=False)

    def inner_block_sigma_min(self, pad: int) -> float:
        """Smallest singular value of the map restricted to inner modes |j| <= J - pad.

        With pad at least the x1 bandwidth of q, the operator maps inner
        modes entirely inside the truncation, so this equals the smallest
        singular value of the untruncated operator on that subspace.
        """
        inner_j = np.abs(self.j_list) <= (np.max(np.abs(self.j_list)) - pad)
        cols = np.repeat(inner_j, self.k_count)
        rect = self.matrix[:, cols]
        return float(np.linalg.svd(rect, compute_uv=False)[-1])


def transverse_potential_tables(basis, q_values: np.ndarray, grid: TorusGrid, j_diffs, k_indices=None) -> dict:
    """T_d[k, k'] = int q_d(x') psi_k'(x') conj(psi_k(x')) |g0|^(1/2) dx' per difference d,
    where q_d is the x1 Fourier coefficient of q at frequency d = j - j'."""
    n = grid.points_per_axis
    qd = np.fft.fft(q_values, axis=0) / n  # (N, *t-shape), FFT layout over d
    psi = basis.samples()  # (K, *t-shape)
    if k_indices is not None:
        psi = psi[k_indices]
    tgrid = basis.grid
    w = basis.density * tgrid.quad_weight
    tables = {}
    taxes = tuple(range(1, tgrid.dim + 1))
    zero = np.zeros((len(psi), len(psi)), dtype=complex)
    for d in j_diffs:
        if abs(int(d)) > n // 2 - 1:
            # beyond the grid Nyquist the sampled q carries no information;
            # band-limited q has zero coupling there, and wrapping the FFT
            # table would alias low frequencies in
            tables[int(d)] = zero
            continue
        qslice = qd[int(d) % n]
        integ = np.tensordot(
            psi.conj() * w,
            qslice[None, ...] * psi,
            axes=(taxes, taxes),
        )
        tables[int(d)] = integ  # [k, k']
    return tables


def build_tensor_floquet_matrix(space: TensorModeSpace, q, theta1: complex, j_cut: int, k_indices=None) -> TensorFloquetMatrix:
    """Dense H(theta) on modes {|j| <= j_cut} x selected basis modes, theta = (theta1, 0').

    k_indices restricts the transverse modes (default: all of them, which is
    only sensible for small bases).
    """
    j_list = np.arange(-j_cut, j_cut + 1)
    lam = space.lam if k_indices is None else space.lam[np.asarray(k_indices)]
    K = len(lam)
    sym = (j_list[:, None].astype(complex) + theta1) ** 2 + lam[None, :]
    size = len(j_list) * K
    matrix = np.diag(sym.reshape(-1))
    qblock = np.zeros((size, size), dtype=complex)
    if q is not None:
        qv = q.values if isinstance(q, GridFunction) else q
        diffs = sorted({int(a - b) for a in j_list for b in j_list})
        tables = transverse_potential_tables(space.basis, qv, space.grid, diffs, k_indices)
        for ia, ja in enumerate(j_list):
            for ib, jb in enumerate(j_list):
                T = tables[int(ja - jb)]
                qblock[ia * K : (ia + 1) * K, ib * K : (ib + 1) * K] = T
        matrix = matrix + qblock
    return TensorFloquetMatrix(
        matrix=matrix,
        j_list=j_list,
        k_count=K,
        theta1=complex(theta1),
        diagonal=sym.reshape(-1),
        potential_block=qblock,
    )
