import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from paracalc.spaces import random_field
from paracalc.spectral_core import (
    DyadicPartition,
    GridFunction,
    SpectralCoeffs,
    apply_multiplier,
    bernstein_ratio,
    chi,
    dyadic_block,
    fft_unitary,
    from_spectral,
    grid,
    l2_norm,
    low_pass,
    phi,
    to_spectral,
    wavenumbers,
)

from conftest import dft_matrix, inverse_dft_matrix

seeds = st.integers(0, 2**31 - 1)
sizes = st.sampled_from([16, 32, 64, 128, 256])


def mode(k, n):
    return np.exp(1j * k * grid(n))


class TestTransforms:
    def test_constant_has_only_zero_mode(self):
        c = to_spectral(np.full(64, 3.0)).coeffs[0]
        assert c[0] == pytest.approx(3.0 * np.sqrt(2 * np.pi))
        assert np.abs(c[1:]).max() < 1e-13

    def test_single_mode_has_one_coefficient(self):
        c = to_spectral(mode(5, 64)).coeffs[0]
        k = wavenumbers(64)
        assert np.abs(c[k != 5]).max() < 1e-12
        assert abs(c[k == 5][0]) > 1

    @given(seeds, sizes)
    def test_matches_explicit_dft(self, seed, n):
        u = random_field(seed, n, real=False).values[0]
        np.testing.assert_allclose(fft_unitary(u), dft_matrix(n) @ u, atol=1e-11)
        np.testing.assert_allclose(from_spectral(to_spectral(u)).values[0],
                                   inverse_dft_matrix(n) @ (dft_matrix(n) @ u), atol=1e-11)

    @given(seeds, sizes)
    def test_round_trip_and_parseval(self, seed, n):
        u = random_field(seed, n, real=False)
        back = from_spectral(to_spectral(u)).values
        assert np.abs(back - u.values).max() <= 10 * np.finfo(float).eps * n * max(1, np.abs(u.values).max())
        spec = np.linalg.norm(to_spectral(u).coeffs)
        assert abs(l2_norm(u) - spec) <= 1e-12 * spec

    def test_real_field_spectrum_is_hermitian(self):
        u = random_field(3, 128)
        c = to_spectral(u).coeffs[0]
        k = wavenumbers(128)
        for i in range(1, 64):
            assert c[k == i][0] == pytest.approx(np.conj(c[k == -i][0]), abs=1e-12)

    @pytest.mark.parametrize("n", [8, 100, 2**17])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(ValueError):
            GridFunction(np.zeros(n))

    def test_size_mismatch_rejected(self):
        with pytest.raises(ValueError):
            SpectralCoeffs(np.zeros((2, 3, 16)))


class TestMultipliers:
    def test_identity(self):
        u = random_field(0, 64)
        np.testing.assert_allclose(apply_multiplier(u, np.ones(64)).values, u.values, atol=1e-14)

    def test_derivative_of_mode(self):
        out = apply_multiplier(mode(3, 64), lambda k: 1j * k).values[0]
        np.testing.assert_allclose(out, 3j * mode(3, 64), atol=1e-12)

    def test_bessel_weight(self):
        out = apply_multiplier(mode(3, 64), lambda k: np.sqrt(1 + k**2)).values[0]
        np.testing.assert_allclose(out, np.sqrt(10) * mode(3, 64), atol=1e-12)

    @given(seeds, st.integers(0, 4))
    def test_commutes_with_blocks(self, seed, j):
        u = random_field(seed, 64)
        w = lambda k: np.log(2 + np.abs(k)) * (1 + 1j * np.sign(k))
        a = dyadic_block(apply_multiplier(u, w), j).values
        b = apply_multiplier(dyadic_block(u, j), w).values
        assert np.abs(a - b).max() <= 1e-12


class TestPartition:
    def test_chi_support_and_monotonicity(self):
        xi = np.linspace(0, 3, 3001)
        c = chi(xi)
        assert np.all(c[xi <= 1.1] == 1.0)
        assert np.all(c[xi >= 1.9] == 0.0)
        assert np.all(np.diff(c) <= 0)

    def test_telescoping_identity(self):
        part = DyadicPartition(256)
        k = part.k.astype(float)
        for J in range(1, part.j_max + 1):
            total = chi(k) + sum(phi(k / 2.0**j) for j in range(1, J + 1))
            np.testing.assert_allclose(total, chi(k / 2.0**J), atol=1e-15)

    def test_block_on_pure_power_of_two(self):
        for j in range(1, 6):
            np.testing.assert_allclose(dyadic_block(mode(2**j, 256), j).values[0], mode(2**j, 256), atol=1e-12)

    def test_constant_lives_in_block_zero(self):
        u = np.full(64, 2.5)
        np.testing.assert_allclose(dyadic_block(u, 0).values[0], u, atol=1e-13)
        for j in range(1, DyadicPartition(64).j_max + 1):
            assert np.abs(dyadic_block(u, j).values).max() < 1e-13

    def test_block_support(self):
        u = random_field(1, 256)
        k = np.abs(wavenumbers(256))
        for j in range(1, DyadicPartition(256).j_max + 1):
            c = np.abs(to_spectral(dyadic_block(u, j)).coeffs[0])
            assert c[(k < 2 ** (j - 1)) | (k > 2 ** (j + 1))].max(initial=0) < 1e-13

    def test_block_index_checked(self):
        with pytest.raises(ValueError):
            dyadic_block(np.zeros(64), 5)
        with pytest.raises(ValueError):
            dyadic_block(np.zeros(64), -1)

    @given(seeds, sizes)
    def test_reconstruction(self, seed, n):
        u = random_field(seed, n)
        part = DyadicPartition(n)
        total = sum(dyadic_block(u, j).values for j in range(part.j_max + 1))
        assert l2_norm(u.values - total) <= 1e-10 * l2_norm(u)

    @given(seeds)
    def test_almost_orthogonality(self, seed):
        u = random_field(seed, 256)
        jm = DyadicPartition(256).j_max
        for j in range(jm + 1):
            for k in range(j + 2, jm + 1):
                assert np.abs(dyadic_block(dyadic_block(u, k), j).values).max() <= 1e-12

    def test_low_pass_conventions(self):
        u = random_field(2, 128)
        np.testing.assert_allclose(low_pass(np.full(128, 4.0), 3).values[0], 4.0)
        assert np.abs(low_pass(u, -1).values).max() == 0
        jm = DyadicPartition(128).j_max
        np.testing.assert_allclose(low_pass(u, jm).values, u.values, atol=1e-12)
        for j in range(jm + 1):
            partial = sum(dyadic_block(u, i).values for i in range(j + 1))
            np.testing.assert_allclose(low_pass(u, j).values, partial, atol=1e-12)


class TestBernstein:
    def test_single_mode_at_scale(self):
        assert bernstein_ratio(mode(16, 256), 4) == pytest.approx(1.0, abs=1e-12)

    def test_single_mode_near_top_of_ring(self):
        k = int(2**5 * 0.9)
        assert bernstein_ratio(mode(k, 256), 4) == pytest.approx(k / 16, abs=1e-12)

    @given(seeds, st.integers(1, 6))
    def test_ring_bracket(self, seed, j):
        r = bernstein_ratio(random_field(seed, 256), j)
        assert 0.5 <= r <= 2.0

    def test_zero_block_rejected(self):
        with pytest.raises(ValueError):
            bernstein_ratio(np.ones(64), 3)
