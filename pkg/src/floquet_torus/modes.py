"""Tensor-mode representation on the full torus.

Functions on T^n are expanded in the orthonormal modes
psi_hat_{j,k} = e^(i j x1) psi_k(x') / sqrt(2 pi), where (lambda_k, psi_k)
is transverse eigendata.  These modes diagonalize the free shifted operator:
H0(theta_tau) psi_hat_{j,k} = mu_{j,k}(tau) psi_hat_{j,k} with
mu_{j,k}(tau) = (j + 1/2)^2 + 2 i tau (j + 1/2) - tau^2 + lambda_k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .grids import TWO_PI, GridFunction, TorusGrid


def mode_eigenvalue(j, lam, tau):
    """mu_{j,k}(tau) for x1 frequency j and transverse eigenvalue lam."""
    half = np.asarray(j, dtype=float) + 0.5
    return half**2 + 2j * tau * half - tau**2 + np.asarray(lam, dtype=float)


@dataclass
class TensorModeSpace:
    """x1 Fourier modes tensored with a transverse eigenbasis.

    Coefficient layout: (..., n_j, K) with j in FFT order of the x1 axis and
    K the transverse basis layout.  analyze/synthesize are adjoint partial
    isometries for the weighted inner product, exact for band-limited data.
    """

    grid: TorusGrid
    basis: object  # any transverse basis exposing eigenvalues/analyze/synthesize/density

    def __post_init__(self):
        if self.grid.dim < 2:
            raise ValueError("tensor modes need dim >= 2")
        if self.basis.grid.points_per_axis != self.grid.points_per_axis:
            raise ValueError("transverse basis grid does not match the full grid resolution")

    @property
    def j_values(self) -> np.ndarray:
        return self.grid.frequencies()

    @property
    def lam(self) -> np.ndarray:
        return np.asarray(self.basis.eigenvalues, dtype=float)

    @property
    def coeff_shape(self) -> tuple:
        return (len(self.j_values), self.basis.count)

    def weight(self) -> np.ndarray:
        """Riemannian density on the full grid (x1-independent product form)."""
        return np.broadcast_to(self.basis.density, self.grid.shape).copy()

    def r_squared(self) -> np.ndarray:
        """(j + 1/2)^2 + lambda_k per mode, shape (n_j, K)."""
        half = self.j_values.astype(float) + 0.5
        return half[:, None] ** 2 + self.lam[None, :]

    def cluster_index(self) -> np.ndarray:
        """m = floor(sqrt((j+1/2)^2 + lambda_k)) per mode."""
        return np.floor(np.sqrt(self.r_squared())).astype(int)

    def mu(self, tau: float) -> np.ndarray:
        half = self.j_values.astype(float) + 0.5
        return mode_eigenvalue(half[:, None] - 0.5, self.lam[None, :], tau)

    def free_symbol(self, theta1: complex) -> np.ndarray:
        """(j + theta1)^2 + lambda_k, the H0(theta) symbol for theta = (theta1, 0')."""
        j = self.j_values.astype(float)
        return (j[:, None] + theta1) ** 2 + self.lam[None, :]

    def analyze(self, values: np.ndarray) -> np.ndarray:
        """Grid samples (..., N, *t-shape) -> coefficients (..., n_j, K)."""
        d = self.grid.dim
        n = self.grid.points_per_axis
        fj = scipy.fft.fft(values, axis=-d, workers=-1) / n
        # move the j axis in front of the transverse block as a batch axis
        coeffs = self.basis.analyze(fj)  # (..., n_j, K)
        return coeffs * np.sqrt(TWO_PI)

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        d = self.grid.dim
        n = self.grid.points_per_axis
        fj = self.basis.synthesize(coeffs / np.sqrt(TWO_PI))
        return scipy.fft.ifft(fj * n, axis=-d, workers=-1)

    def mode_function(self, j: int, k: int) -> GridFunction:
        coeffs = np.zeros(self.coeff_shape, dtype=complex)
        jidx = list(self.j_values).index(j)
        coeffs[jidx, k] = 1.0
        return GridFunction(self.grid, self.synthesize(coeffs), self.weight())


@dataclass
class ModeCoefficients:
    """A function on T^n given by tensor-mode coefficients."""

    space: TensorModeSpace
    coefficients: np.ndarray

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=complex)
        if self.coefficients.shape != self.space.coeff_shape:
            raise ValueError(
                f"coefficient shape {self.coefficients.shape} != {self.space.coeff_shape}"
            )

    def copy_with(self, coefficients: np.ndarray) -> "ModeCoefficients":
        return ModeCoefficients(self.space, coefficients)

    def to_grid(self) -> GridFunction:
        return GridFunction(self.space.grid, self.space.synthesize(self.coefficients), self.space.weight())

    def norm2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coefficients) ** 2)))

    def __sub__(self, other: "ModeCoefficients") -> "ModeCoefficients":
        return self.copy_with(self.coefficients - other.coefficients)


def from_grid(space: TensorModeSpace, f) -> ModeCoefficients:
    values = f.values if isinstance(f, GridFunction) else np.asarray(f, dtype=complex)
    return ModeCoefficients(space, space.analyze(values))
