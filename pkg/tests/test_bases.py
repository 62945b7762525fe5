import math

import numpy as np
import pytest

from sisparse.bases import (
    change_basis,
    dft_matrix,
    fourier_basis,
    lpf_train,
    lpf_train_fourier_indices,
    random_unitary,
    sinc_frame,
    spike_basis,
    spike_fourier_pair,
    unitary_mixed_basis,
)
from sisparse.coherence import analog_coherence
from sisparse.decompose import detect_constant_structure
from sisparse.errors import NotOrthonormal, NotPerfectSquare, NotUnitary, NotUnitaryCross
from sisparse.sispace import (
    CoeffSpectra,
    FrequencyGrid,
    cross_spectrum,
    gram_matrix,
    is_orthonormal,
    riesz_bounds,
    signal_norm,
)


class TestSpike:
    def test_n1_is_unit_lowpass(self, grid):
        s = spike_basis(1, 1.0, grid)
        assert np.allclose(gram_matrix(s).values, 1.0)

    @pytest.mark.parametrize("N", [2, 3, 4, 9])
    def test_orthonormal(self, grid, N):
        assert is_orthonormal(spike_basis(N, 1.0, grid), grid, 1e-10)

    def test_period_scaling(self, grid):
        assert is_orthonormal(spike_basis(4, 2.5, grid), grid, 1e-10)

    def test_samples_are_shifted_spikes(self, grid):
        N, T = 4, 2.0
        t = np.arange(0, 6) * T / N
        vals = spike_basis(N, T, grid).time_values(t)
        expected = math.sqrt(N / T) * np.eye(N, 6)
        assert np.max(np.abs(vals - expected)) < 1e-9

    def test_invalid_n(self, grid):
        with pytest.raises(ValueError):
            spike_basis(0, 1.0, grid)


class TestFourier:
    def test_n1_equals_spike(self, grid):
        assert np.array_equal(fourier_basis(1, 1.0, grid).spectra, spike_basis(1, 1.0, grid).spectra)

    def test_orthonormal_and_disjoint(self, grid):
        f = fourier_basis(4, 1.0, grid)
        assert is_orthonormal(f, grid, 1e-10)
        on = np.abs(f.spectra) > 0
        assert np.all(on.sum(axis=0) <= 1)

    def test_left_edge_belongs_to_lower_interval(self):
        g = FrequencyGrid(8)
        f = fourier_basis(2, 1.0, g)
        # Omega T = pi sits at grid index 4 of replica 0: interval 1 is (0, pi]
        k0 = list(f.shifts).index(0)
        assert f.spectra[0, k0, 4] != 0 and f.spectra[1, k0, 4] == 0

    def test_cross_with_spike_has_modulus_half(self, grid):
        R = cross_spectrum(spike_basis(4, 1.0, grid), fourier_basis(4, 1.0, grid)).values
        assert np.max(np.abs(np.abs(R) - 0.5)) < 1e-12


@pytest.mark.parametrize("N", [1, 4, 9, 16])
def test_pair_coherence(grid, N):
    p = spike_fourier_pair(N, 1.0, grid)
    assert analog_coherence(p.spike, p.fourier, grid).mu == pytest.approx(1 / math.sqrt(N), abs=1e-9)


class TestSincFrame:
    def test_frame_not_basis(self, grid):
        rb = riesz_bounds(gram_matrix(sinc_frame(4, 8, 1.0, grid)))
        assert rb.alpha == pytest.approx(0, abs=1e-10)
        assert rb.beta == pytest.approx(2, abs=1e-10)

    def test_m_equals_n_is_spike(self, grid):
        assert np.allclose(sinc_frame(4, 4, 1.0, grid).spectra, spike_basis(4, 1.0, grid).spectra)

    def test_needs_m_at_least_n(self, grid):
        with pytest.raises(ValueError):
            sinc_frame(4, 3, 1.0, grid)


class TestUnitaryMixed:
    def test_identity_returns_psi(self, pair4, grid):
        phi = unitary_mixed_basis(pair4.fourier, np.eye(4), [0, 0, 0, 0], grid)
        assert np.allclose(phi.spectra, pair4.fourier.spectra, atol=1e-15)

    def test_conj_dft_of_fourier_is_spike_type(self, pair4, grid):
        F = dft_matrix(4)
        phi = unitary_mixed_basis(pair4.fourier, np.conj(F) / 2, [0, 1, 2, 3], grid)
        assert is_orthonormal(phi, grid, 1e-10)
        mags = np.abs(phi.spectra)
        assert set(np.round(mags, 12).ravel()) == {0.0, 0.5}
        fac = detect_constant_structure(cross_spectrum(phi, pair4.fourier), grid)
        assert fac.detected
        assert np.allclose(fac.z_shifts, [0, 1, 2, 3], atol=1e-9)
        assert np.allclose(fac.A, np.conj(F) / 2, atol=1e-9)

    def test_random_unitary_orthonormal(self, grid):
        rng = np.random.default_rng(7)
        psi = spike_basis(3, 1.0, grid)
        phi = unitary_mixed_basis(psi, random_unitary(3, rng), [1, -2, 0], grid)
        assert is_orthonormal(phi, grid, 1e-9)

    def test_rejects_non_unitary(self, pair4, grid):
        with pytest.raises(NotUnitary):
            unitary_mixed_basis(pair4.spike, 2 * np.eye(4), [0] * 4, grid)

    def test_rejects_fractional_delay(self, pair4, grid):
        with pytest.raises(ValueError):
            unitary_mixed_basis(pair4.spike, np.eye(4), [0, 0.5, 0, 0], grid)


def test_random_unitary_is_unitary():
    U = random_unitary(5, np.random.default_rng(0))
    assert np.allclose(U.conj().T @ U, np.eye(5), atol=1e-12)


class TestChangeBasis:
    def test_same_bank_is_identity(self, pair4, grid):
        c = CoeffSpectra(np.random.default_rng(1).standard_normal((4, grid.size)))
        out = change_basis(c, pair4.spike, pair4.spike, grid)
        assert np.allclose(out.values, c.values, atol=1e-14)

    def test_round_trip_unitary_mixed(self, grid):
        rng = np.random.default_rng(2)
        psi = spike_basis(3, 1.0, grid)
        phi = unitary_mixed_basis(psi, random_unitary(3, rng), [0, 1, -1], grid)
        c = CoeffSpectra(rng.standard_normal((3, grid.size)) + 1j * rng.standard_normal((3, grid.size)))
        back = change_basis(change_basis(c, psi, phi, grid), phi, psi, grid)
        assert np.max(np.abs(back.values - c.values)) <= 1e-10
        assert signal_norm(change_basis(c, psi, phi)) == pytest.approx(signal_norm(c), rel=1e-10)

    def test_not_orthonormal(self, pair4, grid):
        c = CoeffSpectra.zeros(4, grid)
        with pytest.raises(NotOrthonormal):
            change_basis(c, pair4.spike.scaled(1, 2.0), pair4.fourier, grid)

    def test_different_spaces(self, grid):
        f = fourier_basis(2, 1.0, grid)
        with pytest.raises(NotUnitaryCross):
            change_basis(CoeffSpectra.zeros(1, grid), f.select([0]), f.select([1]), grid)


class TestLpfTrain:
    @pytest.mark.parametrize("N,fourier,spike", [
        (4, (0, 3), (0, 2)),
        (9, (0, 5, 6), (0, 3, 6)),
        (16, (0, 7, 8, 15), (0, 4, 8, 12)),
    ])
    def test_active_sets(self, grid, N, fourier, spike):
        sig = lpf_train(N, 1.0, grid)
        assert sig.active_fourier == fourier
        assert sig.active_spike == spike
        assert tuple(lpf_train_fourier_indices(N)) == fourier

    @pytest.mark.parametrize("N", [4, 9, 16])
    def test_tight(self, grid, N):
        sig = lpf_train(N, 1.0, grid)
        r = math.isqrt(N)
        assert sig.check.A_count == sig.check.B_count == r
        assert sig.check.satisfied and sig.check.tight

    def test_n4_sums(self, grid):
        sig = lpf_train(4, 1.0, grid)
        assert sig.check.A_count + sig.check.B_count == 4

    def test_spike_coefficients_unimodular(self, grid):
        T = 2.0
        sig = lpf_train(4, T, grid)
        vals = sig.spike_coeffs.values
        on = list(sig.active_spike)
        assert np.allclose(np.abs(vals[on]), 1 / math.sqrt(T), atol=1e-12)
        # upper half-circle closed form: exp(j w (l-1)/N) / sqrt(T)
        up = grid.upper_half()
        w = grid.principal[up]
        for l in on:
            expected = np.exp(1j * w * l / 4) / math.sqrt(T)
            assert np.allclose(vals[l, up], expected, atol=1e-12)

    def test_not_perfect_square(self, grid):
        with pytest.raises(NotPerfectSquare):
            lpf_train(8, 1.0, grid)
