"""Grid, norm, and x1-frequency analysis tests.

Expected values are either exact closed forms (constant and single-mode
integrals on the flat torus) or come from independent quadrature oracles
evaluated at doubled resolution.
"""

import numpy as np
import pytest

from floquet_torus.grids import (
    FrequencyBlock,
    GridFunction,
    TorusGrid,
    assemble_from_x1_modes,
    block_of,
    constant_function,
    lebesgue_norm,
    lp_decompose,
    spectral_derivative,
    weighted_inner,
    x1_fourier_modes,
)

VOL3 = (2.0 * np.pi) ** 3


def random_bandlimited(grid, rng, bandwidth=3, offset=0.0):
    """Random trigonometric polynomial sampled on the grid."""
    values = np.full(grid.shape, offset, dtype=complex)
    for _ in range(6):
        mode = rng.integers(-bandwidth, bandwidth + 1, size=grid.dim)
        amp = rng.standard_normal() + 1j * rng.standard_normal()
        phase = np.zeros(grid.shape)
        for a in range(grid.dim):
            phase = phase + mode[a] * grid.coordinate(a)
        values = values + amp * np.exp(1j * phase)
    return GridFunction(grid, values)


class TestTorusGrid:
    def test_nodes_and_quadrature(self):
        grid = TorusGrid(3, 8)
        assert grid.node_count == 512
        assert np.isclose(grid.spacing, 2 * np.pi / 8)
        assert np.isclose(grid.quad_weight, (2 * np.pi / 8) ** 3)

    def test_rejects_odd_or_tiny(self):
        with pytest.raises(ValueError):
            TorusGrid(3, 7)
        with pytest.raises(ValueError):
            TorusGrid(0, 8)

    def test_transverse_grid(self):
        assert TorusGrid(3, 16).transverse() == TorusGrid(2, 16)


class TestLebesgueNorm:
    def test_constant_on_t3(self):
        # exact volume: ||1||_2 = ((2 pi)^3)^(1/2)
        f = constant_function(TorusGrid(3, 8))
        assert abs(lebesgue_norm(f, 2) - np.sqrt(VOL3)) < 1e-12

    def test_single_mode_parseval(self):
        grid = TorusGrid(3, 8)
        f = GridFunction(grid, np.cos(grid.coordinate(0)))
        assert abs(lebesgue_norm(f, 2) - np.sqrt(VOL3 / 2)) < 1e-12

    def test_fractional_p_against_refined_oracle(self):
        # oracle: same Riemann sum at 2x resolution; f is band-limited so its
        # resampling is exact and |f|^(3/2) is smooth (f bounded away from 0)
        def sample(grid):
            rng = np.random.default_rng(7)
            f = random_bandlimited(grid, rng, bandwidth=2)
            return f.copy_with(4.0 + 0.4 * f.values)

        a = lebesgue_norm(sample(TorusGrid(3, 16)), 1.5)
        b = lebesgue_norm(sample(TorusGrid(3, 32)), 1.5)
        assert abs(a - b) / b < 1e-6

    def test_monotone_in_pointwise_abs(self):
        grid = TorusGrid(2, 8)
        rng = np.random.default_rng(3)
        f = random_bandlimited(grid, rng)
        g = f.copy_with(2.0 * f.values)
        for p in (1.0, 1.2, 2.0, 6.0):
            assert lebesgue_norm(g, p) >= lebesgue_norm(f, p)

    def test_rejects_nonfinite_with_node_diagnostic(self):
        grid = TorusGrid(2, 4)
        values = np.ones(grid.shape, dtype=complex)
        values[1, 2] = np.nan
        f = GridFunction(grid, values)
        with pytest.raises(ValueError, match=r"\(1, 2\)"):
            lebesgue_norm(f, 2)

    def test_quadrature_exactness_for_trig_polynomials(self):
        # analytic L2 norm of a trig polynomial with degree < N/2
        grid = TorusGrid(3, 16)
        x1, x2 = grid.coordinate(0), grid.coordinate(1)
        f = GridFunction(grid, 2.0 + np.exp(1j * 3 * x1) - 0.5 * np.exp(1j * (x1 + 2 * x2)))
        exact = np.sqrt(VOL3 * (4.0 + 1.0 + 0.25))
        assert abs(lebesgue_norm(f, 2) - exact) / exact < 1e-12

    def test_holder_with_conjugate_exponents(self):
        # |<f,g>| <= ||f||_p ||g||_p' with p = 2n/(n-2) = 6 and p' = 2n/(n+2) = 6/5
        rng = np.random.default_rng(11)
        grid = TorusGrid(3, 8)
        for _ in range(100):
            f = random_bandlimited(grid, rng)
            g = random_bandlimited(grid, rng)
            lhs = abs(weighted_inner(f, g))
            rhs = lebesgue_norm(f, 6.0) * lebesgue_norm(g, 1.2)
            assert lhs <= rhs * (1 + 1e-12)

    def test_trilinear_potential_pairing(self):
        # |<q u, v>| <= ||q||_{3/2} ||u||_6 ||v||_6, the pairing the estimates use
        rng = np.random.default_rng(12)
        grid = TorusGrid(3, 8)
        for _ in range(20):
            q = random_bandlimited(grid, rng)
            u = random_bandlimited(grid, rng)
            v = random_bandlimited(grid, rng)
            qu = u.copy_with(q.values * u.values)
            lhs = abs(weighted_inner(qu, v))
            rhs = lebesgue_norm(q, 1.5) * lebesgue_norm(u, 6.0) * lebesgue_norm(v, 6.0)
            assert lhs <= rhs * (1 + 1e-12)


class TestX1FourierModes:
    def test_single_mode_isolated(self):
        grid = TorusGrid(3, 8)
        f = GridFunction(grid, np.exp(2j * grid.coordinate(0)))
        modes = x1_fourier_modes(f)
        assert np.allclose(modes[2].values, 1.0)
        for j, fj in modes.items():
            if j != 2:
                assert np.max(np.abs(fj.values)) < 1e-13

    def test_reality_symmetry(self):
        grid = TorusGrid(2, 8)
        rng = np.random.default_rng(5)
        f = random_bandlimited(grid, rng)
        f = f.copy_with(f.values.real.astype(complex))
        modes = x1_fourier_modes(f)
        for j in range(1, 4):
            assert np.allclose(modes[-j].values, np.conj(modes[j].values), atol=1e-12)

    def test_parseval_against_quadrature_oracle(self):
        grid = TorusGrid(3, 16)
        rng = np.random.default_rng(9)
        f = random_bandlimited(grid, rng)
        modes = x1_fourier_modes(f)
        total = sum(lebesgue_norm(fj, 2) ** 2 for fj in modes.values()) * 2 * np.pi
        direct = lebesgue_norm(f, 2) ** 2
        assert abs(total - direct) / direct < 1e-10

    def test_reassembly_roundtrip(self):
        grid = TorusGrid(2, 16)
        rng = np.random.default_rng(13)
        f = random_bandlimited(grid, rng)
        back = assemble_from_x1_modes(x1_fourier_modes(f), grid)
        assert np.max(np.abs(back.values - f.values)) < 1e-12


class TestLittlewoodPaley:
    def test_blocks_partition_frequencies(self):
        seen = {}
        for j in range(-64, 65):
            b = block_of(j)
            assert b.contains(j)
            seen.setdefault(j, b.nu)
        # each j is in exactly one block: membership of all other blocks is false
        for j in (-9, -1, 0, 3, 17):
            hits = [nu for nu in range(0, 8) if FrequencyBlock(nu).contains(j)]
            assert len(hits) == 1

    def test_single_high_mode_lands_in_nu2(self):
        grid = TorusGrid(3, 16)
        h = np.exp(1j * grid.coordinate(1))
        f = GridFunction(grid, np.exp(3j * grid.coordinate(0)) * h)
        pieces = lp_decompose(f)
        nonzero = [blk.nu for blk, piece in pieces if np.max(np.abs(piece.values)) > 1e-12]
        assert nonzero == [2]

    def test_x1_independent_is_nu0(self):
        grid = TorusGrid(3, 16)
        f = GridFunction(grid, np.cos(grid.coordinate(1)) + 0.0j)
        pieces = lp_decompose(f)
        nonzero = [blk.nu for blk, piece in pieces if np.max(np.abs(piece.values)) > 1e-12]
        assert nonzero == [0]

    def test_reconstruction(self):
        grid = TorusGrid(3, 16)
        rng = np.random.default_rng(21)
        f = random_bandlimited(grid, rng, bandwidth=6)
        pieces = lp_decompose(f)
        total = sum(piece.values for _, piece in pieces)
        assert np.sqrt(np.sum(np.abs(total - f.values) ** 2) * grid.quad_weight) < 1e-12

    def test_blocks_orthogonal_under_x1_independent_weight(self):
        grid = TorusGrid(2, 16)
        weight = 1.0 + 0.5 * np.sin(grid.coordinate(1))
        rng = np.random.default_rng(23)
        f = random_bandlimited(grid, rng, bandwidth=6)
        f = GridFunction(grid, f.values, weight)
        pieces = lp_decompose(f)
        for a in range(len(pieces)):
            for b in range(a + 1, len(pieces)):
                ip = weighted_inner(pieces[a][1], pieces[b][1])
                assert abs(ip) < 1e-10


class TestSpectralDerivative:
    def test_plane_wave(self):
        grid = TorusGrid(2, 16)
        f = np.exp(1j * (3 * grid.coordinate(0) - 2 * grid.coordinate(1)))
        d0 = spectral_derivative(f, 0, grid)
        d1 = spectral_derivative(f, 1, grid)
        assert np.allclose(d0, 3 * f, atol=1e-12)
        assert np.allclose(d1, -2 * f, atol=1e-12)


class TestSerialization:
    def test_csv_roundtrip(self):
        from floquet_torus.grids import gridfunction_from_rows, gridfunction_to_rows

        grid = TorusGrid(2, 4)
        rng = np.random.default_rng(1)
        f = GridFunction(grid, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))
        back = gridfunction_from_rows(gridfunction_to_rows(f), grid)
        assert np.allclose(back.values, f.values, atol=1e-15)

    def test_json_roundtrip(self):
        from floquet_torus.grids import gridfunction_from_json, gridfunction_to_json

        grid = TorusGrid(2, 4)
        rng = np.random.default_rng(2)
        weight = 1.0 + rng.random(grid.shape)
        f = GridFunction(grid, rng.standard_normal(grid.shape) + 0.5j, weight)
        back = gridfunction_from_json(gridfunction_to_json(f))
        assert np.allclose(back.values, f.values, atol=1e-15)
        assert np.allclose(back.weight, f.weight, atol=1e-15)

    def test_matrix_rows_schema(self):
        from floquet_torus.grids import matrix_to_rows

        m = np.array([[1.0 + 2.0j, 0.0], [0.5, -1.0j]])
        rows = matrix_to_rows(m)
        assert rows[0] == [0, 0, 1.0, 2.0]
        assert rows[3] == [1, 1, 0.0, -1.0]
