"""Transverse Laplace-Beltrami eigendata on T^(n-1).

The operator -Delta_{g0} = -|g0|^(-1/2) d_j (|g0|^(1/2) g0^{jk} d_k .) is
assembled as a Fourier-Galerkin pair (stiffness, mass) so the discrete
problem is exactly Hermitian in the weighted inner product, then reduced to
an ordinary Hermitian eigenproblem through a Cholesky factor of the mass.

Three routes produce the same eigendata interface:
  * the generic Galerkin assembly for any smooth metric,
  * the closed-form lattice for the flat metric (lambda = |k'|^2),
  * a separable fast path for 2D conformal metrics rho(x2) * I, where the
    problem splits into small 1D pencils per x3 frequency.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft
import scipy.linalg

from .grids import TWO_PI, GridFunction, TorusGrid

DEGENERACY_RTOL = 1e-8


@dataclass
class TransverseMetric:
    """Riemannian metric g0 on the transverse torus, sampled per node.

    components has shape (d, d, *grid.shape) and must be symmetric positive
    definite at every node.  bandwidth declares the largest Fourier mode of
    any component (used to certify quadrature exactness during assembly).
    """

    grid: TorusGrid
    components: np.ndarray
    bandwidth: int = 0
    inverse_components: np.ndarray = field(default=None)
    density: np.ndarray = field(default=None)

    def __post_init__(self):
        d = self.grid.dim
        comp = np.asarray(self.components, dtype=float)
        if comp.shape != (d, d) + self.grid.shape:
            raise ValueError(
                f"metric components shape {comp.shape} != {(d, d) + self.grid.shape}"
            )
        self.components = comp
        mats = comp.reshape(d, d, -1).transpose(2, 0, 1)
        if not np.allclose(mats, mats.transpose(0, 2, 1), atol=1e-12):
            raise ValueError("metric components must be symmetric")
        eigs = np.linalg.eigvalsh(mats)
        if eigs.min() <= 0:
            raise ValueError(f"metric not positive definite (min eigenvalue {eigs.min():.3e})")
        dets = np.linalg.det(mats)
        if self.density is None:
            self.density = np.sqrt(dets).reshape(self.grid.shape)
        else:
            self.density = np.asarray(self.density, dtype=float)
            if not np.allclose(self.density.ravel(), np.sqrt(dets), atol=1e-12):
                raise ValueError("density inconsistent with sqrt(det g0)")
        if self.inverse_components is None:
            inv = np.linalg.inv(mats)
            self.inverse_components = inv.transpose(1, 2, 0).reshape(comp.shape)
        else:
            inv = np.asarray(self.inverse_components, dtype=float).reshape(d, d, -1)
            prod = np.einsum("ab...,bc...->ac...", inv, comp.reshape(d, d, -1))
            ident = np.eye(d)[:, :, None]
            if not np.allclose(prod, ident, atol=1e-12):
                raise ValueError("inverse_components * components != identity")
            self.inverse_components = self.inverse_components.reshape(comp.shape)


def flat_metric(grid: TorusGrid) -> TransverseMetric:
    d = grid.dim
    comp = np.zeros((d, d) + grid.shape)
    for a in range(d):
        comp[a, a] = 1.0
    return TransverseMetric(grid, comp, bandwidth=0)


def conformal_metric(grid: TorusGrid, rho: np.ndarray, bandwidth: int) -> TransverseMetric:
    """g0 = rho(x') * I with rho > 0 sampled on the grid."""
    d = grid.dim
    rho = np.broadcast_to(np.asarray(rho, dtype=float), grid.shape)
    comp = np.zeros((d, d) + grid.shape)
    for a in range(d):
        comp[a, a] = rho
    return TransverseMetric(grid, comp, bandwidth=bandwidth)


def metric_from_components(grid: TorusGrid, entries: dict, bandwidth: int) -> TransverseMetric:
    """Build a metric from {(a, b): sampled array} upper-triangle entries."""
    d = grid.dim
    comp = np.zeros((d, d) + grid.shape)
    for (a, b), vals in entries.items():
        arr = np.broadcast_to(np.asarray(vals, dtype=float), grid.shape)
        comp[a, b] = arr
        comp[b, a] = arr
    return TransverseMetric(grid, comp, bandwidth=bandwidth)


def fourier_mode_box(dim: int, k_max: int) -> np.ndarray:
    """All integer modes with |k|_inf <= k_max, lexicographic order, shape (M, dim)."""
    axes = [np.arange(-k_max, k_max + 1)] * dim
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass
class GalerkinForms:
    """Stiffness/mass pair of -Delta_{g0} in the Fourier basis e^(i k.x')."""

    stiffness: np.ndarray
    mass: np.ndarray
    modes: np.ndarray
    metric: TransverseMetric
    k_max: int


def _fourier_table(values: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """DFT coefficients of a sampled field, FFT layout, normalized to F[w]_m."""
    return np.fft.fftn(values) / grid.node_count


def assemble_forms(metric: TransverseMetric, max_mode: int) -> GalerkinForms:
    """Galerkin stiffness and mass of -Delta_{g0} over modes |k'|_inf <= max_mode.

    Exactness requires the grid to integrate g0^{jk} |g0|^(1/2) e^(i(b-a)x')
    without aliasing: N >= 2*max_mode + bandwidth + 1.
    """
    grid = metric.grid
    d = grid.dim
    n = grid.points_per_axis
    needed = 2 * max_mode + metric.bandwidth + 1
    if n < needed:
        raise ValueError(
            f"grid resolution {n} insufficient for K_max={max_mode} with metric "
            f"bandwidth {metric.bandwidth}; need at least {needed} points per axis"
        )
    modes = fourier_mode_box(d, max_mode)
    diff = modes[:, None, :] - modes[None, :, :]  # a - b
    rho = metric.density
    vol = TWO_PI ** d

    rho_hat = _fourier_table(rho, grid)
    idx = tuple(diff[..., a] % n for a in range(d))
    mass = vol * rho_hat[idx]

    inv = metric.inverse_components
    stiff = np.zeros_like(mass)
    a_modes = modes.astype(float)
    for j in range(d):
        for k in range(d):
            gw_hat = _fourier_table(inv[j, k] * rho, grid)
            stiff = stiff + np.multiply.outer(a_modes[:, j], a_modes[:, k]) * vol * gw_hat[idx]

    # the integrands are real, so the pairs are Hermitian up to roundoff
    mass = 0.5 * (mass + mass.conj().T)
    stiff = 0.5 * (stiff + stiff.conj().T)
    mass_eigs = np.linalg.eigvalsh(mass)
    if mass_eigs.min() <= 0:
        raise ValueError(
            f"mass form is not positive definite (min eigenvalue {mass_eigs.min():.3e}); "
            "the grid under-resolves the metric or the metric is invalid"
        )
    return GalerkinForms(stiff, mass, modes, metric, max_mode)


@dataclass
class TransverseBasis:
    """Eigenpairs (lambda_k, psi_k) of -Delta_{g0}, orthonormal in L^2(|g0|^(1/2) dx').

    coefficients[k] holds psi_k in the Fourier basis of the assembly; samples
    are materialized lazily on the metric grid.  complete_below marks the
    eigenvalue threshold under which the list is certified complete (used by
    series tail accounting downstream).
    """

    eigenvalues: np.ndarray
    coefficients: np.ndarray
    modes: np.ndarray
    grid: TorusGrid
    density: np.ndarray
    complete_below: float
    accuracy_note: str = ""
    _samples: np.ndarray = field(default=None, repr=False)

    @property
    def count(self) -> int:
        return len(self.eigenvalues)

    def samples(self) -> np.ndarray:
        """Eigenfunction values on the grid, shape (K, *grid.shape)."""
        if self._samples is None:
            n = self.grid.points_per_axis
            spec = np.zeros((self.count,) + self.grid.shape, dtype=complex)
            for a, mode in enumerate(self.modes):
                idx = tuple(int(m) % n for m in mode)
                spec[(slice(None),) + idx] = self.coefficients[:, a]
            self._samples = np.fft.ifftn(spec, axes=tuple(range(1, self.grid.dim + 1))) * self.grid.node_count
        return self._samples

    def eigenfunction(self, k: int) -> GridFunction:
        return GridFunction(self.grid, self.samples()[k], self.density)

    def analyze(self, values: np.ndarray) -> np.ndarray:
        """Weighted projections <f, psi_k>, batched over leading axes."""
        psi = self.samples()
        w = self.density * self.grid.quad_weight
        return np.tensordot(values * w, psi.conj(), axes=(tuple(range(-self.grid.dim, 0)), tuple(range(1, self.grid.dim + 1))))

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        psi = self.samples()
        return np.tensordot(coeffs, psi, axes=((-1,), (0,)))

    def to_artifact(self) -> dict:
        s = self.samples()
        return {
            "grid": {"dim": self.grid.dim, "points_per_axis": self.grid.points_per_axis},
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "complete_below": float(self.complete_below),
            "accuracy_note": self.accuracy_note,
            "density": self.density.ravel().tolist(),
            "eigenfunctions_re": [s[k].real.ravel().tolist() for k in range(self.count)],
            "eigenfunctions_im": [s[k].imag.ravel().tolist() for k in range(self.count)],
        }


def basis_from_artifact(doc: dict) -> "SampledTransverseBasis":
    grid = TorusGrid(doc["grid"]["dim"], doc["grid"]["points_per_axis"])
    density = np.asarray(doc["density"], dtype=float).reshape(grid.shape)
    lams = np.asarray(doc["eigenvalues"], dtype=float)
    samples = np.array(
        [
            np.asarray(re, dtype=float).reshape(grid.shape)
            + 1j * np.asarray(im, dtype=float).reshape(grid.shape)
            for re, im in zip(doc["eigenfunctions_re"], doc["eigenfunctions_im"])
        ]
    )
    return SampledTransverseBasis(
        eigenvalues=lams,
        grid=grid,
        density=density,
        samples=samples,
        complete_below=float(doc.get("complete_below", lams[-1] if len(lams) else 0.0)),
        accuracy_note=doc.get("accuracy_note", ""),
    )


@dataclass
class SampledTransverseBasis:
    """Basis given directly by eigenfunction samples (deserialized artifacts)."""

    eigenvalues: np.ndarray
    grid: TorusGrid
    density: np.ndarray
    samples_array: np.ndarray = field(default=None)
    complete_below: float = 0.0
    accuracy_note: str = ""

    def __init__(self, eigenvalues, grid, density, samples, complete_below, accuracy_note=""):
        self.eigenvalues = np.asarray(eigenvalues, dtype=float)
        self.grid = grid
        self.density = np.asarray(density, dtype=float)
        self.samples_array = np.asarray(samples, dtype=complex)
        self.complete_below = complete_below
        self.accuracy_note = accuracy_note

    @property
    def count(self) -> int:
        return len(self.eigenvalues)

    def samples(self) -> np.ndarray:
        return self.samples_array

    def eigenfunction(self, k: int) -> GridFunction:
        return GridFunction(self.grid, self.samples_array[k], self.density)

    def analyze(self, values: np.ndarray) -> np.ndarray:
        w = self.density * self.grid.quad_weight
        return np.tensordot(
            values * w,
            self.samples_array.conj(),
            axes=(tuple(range(-self.grid.dim, 0)), tuple(range(1, self.grid.dim + 1))),
        )

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        return np.tensordot(coeffs, self.samples_array, axes=((-1,), (0,)))


def _tie_break_order(eigenvalues: np.ndarray, coefficients: np.ndarray, modes: np.ndarray) -> np.ndarray:
    """Stable order: ascending eigenvalue, ties by lex order of the dominant mode."""
    dominant = np.argmax(np.abs(coefficients), axis=1)
    keys = [tuple(modes[d]) for d in dominant]
    order = list(range(len(eigenvalues)))
    order.sort(key=lambda i: (eigenvalues[i], keys[i]))
    # within numerically degenerate groups the eigenvalue comparison may be
    # unstable; re-sort each group purely by mode key
    out = []
    i = 0
    while i < len(order):
        grp = [order[i]]
        while (
            i + 1 < len(order)
            and abs(eigenvalues[order[i + 1]] - eigenvalues[grp[0]])
            <= DEGENERACY_RTOL * (1.0 + abs(eigenvalues[grp[0]]))
        ):
            grp.append(order[i + 1])
            i += 1
        grp.sort(key=lambda idx: keys[idx])
        out.extend(grp)
        i += 1
    return np.asarray(out)


def eigendecompose(forms: GalerkinForms, lambda_cut: float = None) -> TransverseBasis:
    """Solve the generalized pencil (stiffness, mass) and return eigendata.

    Eigenvectors are mass-orthonormal, hence the sampled eigenfunctions are
    orthonormal in the weighted inner product.  Ordering is deterministic:
    ascending eigenvalue, near-degenerate ties broken by the lexicographic
    order of each eigenvector's dominant Fourier mode, dominant coefficient
    rotated to the positive real axis.
    """
    if lambda_cut is None:
        lambda_cut = float(forms.k_max) ** 2
    try:
        lams, vecs = scipy.linalg.eigh(forms.stiffness, forms.mass)
    except scipy.linalg.LinAlgError as exc:
        cond = np.linalg.cond(forms.mass)
        raise RuntimeError(
            f"generalized eigensolver failed (mass condition estimate {cond:.3e})"
        ) from exc
    keep = lams <= lambda_cut + 1e-12
    lams, vecs = lams[keep], vecs[:, keep]
    order = _tie_break_order(lams, vecs.T, forms.modes)
    lams, vecs = lams[order], vecs[:, order]
    dominant = np.argmax(np.abs(vecs), axis=0)
    phases = vecs[dominant, np.arange(vecs.shape[1])]
    phases = np.where(np.abs(phases) == 0, 1.0, phases / np.abs(phases))
    vecs = vecs / phases[None, :]
    return TransverseBasis(
        eigenvalues=lams,
        coefficients=vecs.T.copy(),
        modes=forms.modes,
        grid=forms.metric.grid,
        density=forms.metric.density,
        complete_below=float(lambda_cut),
    )


def refinement_deltas(metric: TransverseMetric, k_max: int, count: int, lambda_cut=None) -> np.ndarray:
    """Eigenvalue accuracy estimate: |lambda(K_max) - lambda(K_max + 2)| per mode.

    The refined assembly may need a finer grid; the metric samples are reused
    when they suffice, otherwise the caller must provide an adequate grid.
    """
    base = eigendecompose(assemble_forms(metric, k_max), lambda_cut)
    fine = eigendecompose(assemble_forms(metric, k_max + 2), lambda_cut)
    k = min(count, base.count, fine.count)
    return np.abs(base.eigenvalues[:k] - fine.eigenvalues[:k])


# ---------------------------------------------------------------------------
# flat lattice eigendata
# ---------------------------------------------------------------------------


def flat_lattice_eigenvalues(limit: float, dim: int = 2) -> np.ndarray:
    """Distinct eigenvalues of -Delta on flat T^dim up to `limit`: |k'|^2 values.

    The returned list is complete below `limit`, which is what the series
    tail accounting consumes.
    """
    if dim == 1:
        k = np.arange(0, int(np.floor(np.sqrt(limit))) + 1)
        return np.unique(k ** 2).astype(float)
    reach = int(np.floor(np.sqrt(limit)))
    a = np.arange(0, reach + 1)
    vals = a[:, None] ** 2 + a[None, :] ** 2
    if dim == 3:
        vals = vals[:, :, None] + a[None, None, :] ** 2
    vals = np.unique(vals.ravel())
    return vals[vals <= limit].astype(float)


@dataclass
class FlatTransverseBasis:
    """Flat-metric eigenbasis: normalized Fourier modes, FFT coefficient layout.

    analyze/synthesize run through the FFT, so the mode count equals the full
    grid and lambda = |k'|^2 sits in FFT order (not ascending).
    """

    grid: TorusGrid

    @property
    def count(self) -> int:
        return self.grid.node_count

    @property
    def density(self) -> np.ndarray:
        return np.ones(self.grid.shape)

    @property
    def eigenvalues(self) -> np.ndarray:
        freqs = self.grid.frequencies()
        lam = np.zeros(self.grid.shape)
        for a in range(self.grid.dim):
            shape = [1] * self.grid.dim
            shape[a] = len(freqs)
            lam = lam + (freqs.reshape(shape)) ** 2
        return lam.reshape(-1).astype(float)

    @property
    def complete_below(self) -> float:
        # all modes |k'|_inf <= N/2 - 1 are present; completeness holds below
        # the smallest absent |k'|^2
        return float((self.grid.points_per_axis // 2) ** 2)

    def analyze(self, values: np.ndarray) -> np.ndarray:
        d = self.grid.dim
        axes = tuple(range(-d, 0))
        coeff = scipy.fft.fftn(values, axes=axes, workers=-1) / self.grid.node_count
        scale = TWO_PI ** (d / 2.0)
        return (coeff * scale).reshape(values.shape[: values.ndim - d] + (-1,))

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        d = self.grid.dim
        shape = coeffs.shape[:-1] + self.grid.shape
        spec = coeffs.reshape(shape) * (self.grid.node_count / TWO_PI ** (d / 2.0))
        return scipy.fft.ifftn(spec, axes=tuple(range(-d, 0)), workers=-1)

    def eigenfunction(self, k: int) -> GridFunction:
        coeffs = np.zeros(self.count, dtype=complex)
        coeffs[k] = 1.0
        return GridFunction(self.grid, self.synthesize(coeffs), self.density)

    def samples(self) -> np.ndarray:
        eye = np.eye(self.count, dtype=complex)
        return self.synthesize(eye)


# ---------------------------------------------------------------------------
# separable fast path for 2D conformal metrics rho(x2) * I
# ---------------------------------------------------------------------------


@dataclass
class SeparableConformalBasis:
    """Eigenbasis of -Delta_{g0} for g0 = rho(x2) I on T^2.

    In 2D the conformal Laplacian satisfies -Delta_{g0} = rho^(-1) (-Delta),
    so with psi = e^(i k3 x3) phi(x2) the pencil splits per k3 into
    (D2^2 + k3^2) phi = lambda rho phi.  Layout: coeffs[..., i, k3] with k3 in
    FFT order of the grid and i the 1D mode index per k3.
    """

    grid: TorusGrid
    rho: np.ndarray
    eigenvalue_table: np.ndarray  # (n_modes, n_k3)
    synth_tables: np.ndarray      # (n_k3, N2, n_modes): phi values on the x2 grid
    analysis_tables: np.ndarray   # (n_k3, n_modes, N2)
    complete_below: float

    @property
    def count(self) -> int:
        return self.eigenvalue_table.size

    @property
    def density(self) -> np.ndarray:
        return np.broadcast_to(self.rho[:, None], self.grid.shape).copy()

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eigenvalue_table.reshape(-1)

    def analyze(self, values: np.ndarray) -> np.ndarray:
        n3 = self.grid.points_per_axis
        nm = self.eigenvalue_table.shape[0]
        spec = scipy.fft.fft(values, axis=-1, workers=-1) / n3  # (..., N2, k3)
        lead = spec.shape[:-2]
        # one batched matmul per k3: (k3, nm, N2) @ (k3, N2, B)
        stacked = np.moveaxis(spec, -1, 0).reshape(n3, -1, spec.shape[-2]).transpose(0, 2, 1)
        out = np.matmul(self.analysis_tables, stacked)  # (k3, nm, B)
        coeffs = out.transpose(2, 1, 0).reshape(lead + (nm, n3))
        return coeffs.reshape(lead + (nm * n3,))

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        n3 = self.grid.points_per_axis
        nm = self.eigenvalue_table.shape[0]
        lead = coeffs.shape[:-1]
        table = coeffs.reshape(lead + (nm, n3))
        stacked = np.moveaxis(table, -1, 0).reshape(n3, -1, nm).transpose(0, 2, 1)
        out = np.matmul(self.synth_tables, stacked)  # (k3, N2, B)
        spec = out.transpose(2, 1, 0).reshape(lead + (out.shape[1], n3))
        return scipy.fft.ifft(spec * n3, axis=-1, workers=-1)

    def eigenfunction(self, flat_index: int) -> GridFunction:
        coeffs = np.zeros(self.count, dtype=complex)
        coeffs[flat_index] = 1.0
        return GridFunction(self.grid, self.synthesize(coeffs), self.density)

    def samples(self) -> np.ndarray:
        return self.synthesize(np.eye(self.count, dtype=complex))


def separable_conformal_basis(grid: TorusGrid, rho: np.ndarray, bandwidth: int) -> SeparableConformalBasis:
    """Diagonalize -Delta_{rho I} on T^2 via per-k3 1D Fourier-Galerkin pencils."""
    if grid.dim != 2:
        raise ValueError("separable conformal basis requires a 2D transverse grid")
    n = grid.points_per_axis
    rho = np.broadcast_to(np.asarray(rho, dtype=float), (n,)).copy()
    if np.any(rho <= 0):
        raise ValueError("conformal factor must be positive")
    k2_cut = n // 2 - 1
    if n < 2 * k2_cut + bandwidth + 1:
        k2_cut = (n - bandwidth - 1) // 2
    ms = np.arange(-k2_cut, k2_cut + 1)
    nm = len(ms)
    rho_hat = np.fft.fft(rho) / n
    diff = (ms[:, None] - ms[None, :]) % n
    B = TWO_PI * rho_hat[diff]
    B = 0.5 * (B + B.conj().T)

    k3s = grid.frequencies()
    eig_table = np.zeros((nm, len(k3s)))
    synth = np.zeros((len(k3s), n, nm), dtype=complex)
    analysis = np.zeros((len(k3s), nm, n), dtype=complex)
    x2 = grid.axis_coordinates()
    fourier = np.exp(1j * np.outer(x2, ms))  # (N2, nm)
    w2 = TWO_PI / n
    cache = {}
    for col, k3 in enumerate(k3s):
        key = abs(int(k3))
        if key not in cache:
            A = TWO_PI * np.diag((ms ** 2 + key ** 2).astype(float))
            lams, vecs = scipy.linalg.eigh(A, B)
            # normalize the 2D tensor modes: ||e^(i k3 x3) phi||^2 = 2 pi int |phi|^2 rho
            vecs = vecs / np.sqrt(TWO_PI)
            phi = fourier @ vecs  # (N2, nm)
            cache[key] = (lams, phi)
        lams, phi = cache[key]
        eig_table[:, col] = lams
        synth[col] = phi
        analysis[col] = (phi.conj() * (rho * w2)[:, None]).T * TWO_PI
    complete = float(k2_cut ** 2)  # conservative: smallest possibly-missing 1D pencil reach
    return SeparableConformalBasis(
        grid=grid,
        rho=rho,
        eigenvalue_table=eig_table,
        synth_tables=synth,
        analysis_tables=analysis,
        complete_below=complete,
    )
