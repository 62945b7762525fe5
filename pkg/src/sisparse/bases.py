"""Concrete generator banks and signals.

All constructors describe real signals band-limited to (-pi*N/T, pi*N/T].
Band and interval edges are half-open exactly as written below and are
evaluated in integer replica coordinates, so they are exact on any even grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coherence import analog_coherence, uncertainty_check, UncertaintyCheck
from .errors import NotOrthonormal, NotPerfectSquare, NotUnitary, NotUnitaryCross
from .sispace import (
    CoeffSpectra,
    FrequencyGrid,
    GeneratorBank,
    band_shifts,
    cross_spectrum,
    is_orthonormal,
)

CHANGE_TOL = 1e-8


def _check_grid(N, grid):
    # Edges sit at integer replica coordinates for every even K, so no
    # divisibility of K by N is needed.
    if N < 1:
        raise ValueError("N must be >= 1")


def _in_band(u, K, N):
    # Omega*T = 2*pi*u/K in (-pi*N, pi*N]
    return (2 * u > -N * K) & (2 * u <= N * K)


def spike_basis(N: int, T: float, grid: FrequencyGrid) -> GeneratorBank:
    """Sinc shifts by T/N: Phi_l(Omega) = sqrt(T/N) exp(-j Omega (l-1) T/N) on the band."""
    _check_grid(N, grid)

    def gen(l, u, K):
        phase = np.exp(-2j * np.pi * u * l / (K * N))
        return np.where(_in_band(u, K, N), math.sqrt(T / N) * phase, 0.0)

    return GeneratorBank.from_function(gen, N, T, grid, band_shifts(N), name="spike")


def fourier_basis(N: int, T: float, grid: FrequencyGrid) -> GeneratorBank:
    """Disjoint-band low-pass generators: Psi_l = sqrt(T) on the l-th interval.

    Interval l covers Omega*T/pi in (l-1, l] and (-l, -(l-1)], so the N
    intervals tile the band (-pi*N/T, pi*N/T] without overlap.
    """
    _check_grid(N, grid)

    def gen(l, u, K):
        two_u = 2 * u
        pos = (two_u > l * K) & (two_u <= (l + 1) * K)
        neg = (two_u > -(l + 1) * K) & (two_u <= -l * K)
        return np.where(pos | neg, math.sqrt(T), 0.0)

    return GeneratorBank.from_function(gen, N, T, grid, band_shifts(N), name="fourier")


def sinc_frame(N: int, m: int, T: float, grid: FrequencyGrid) -> GeneratorBank:
    """m > N sinc generators of bandwidth pi*N/T shifted by T/m.

    D_r(Omega) = sqrt(T/N) exp(-j Omega (r-1) T/m) on the band; these
    generate a frame (not a basis) for the band-limited space.
    """
    _check_grid(N, grid)
    if m < N:
        raise ValueError("a frame needs m >= N generators")

    def gen(r, u, K):
        phase = np.exp(-2j * np.pi * u * r / (K * m))
        return np.where(_in_band(u, K, N), math.sqrt(T / N) * phase, 0.0)

    return GeneratorBank.from_function(gen, m, T, grid, band_shifts(N), name="sinc_frame")


@dataclass(frozen=True)
class SpikeFourierPair:
    spike: GeneratorBank
    fourier: GeneratorBank
    N: int
    T: float


def spike_fourier_pair(N: int, T: float, grid: FrequencyGrid) -> SpikeFourierPair:
    return SpikeFourierPair(spike_basis(N, T, grid), fourier_basis(N, T, grid), N, float(T))


def random_unitary(N: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR factorization of a complex Gaussian."""
    g = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))


def dft_matrix(N: int) -> np.ndarray:
    """Unnormalized DFT matrix F[l, r] = exp(-2j pi l r / N)."""
    n = np.arange(N)
    return np.exp(-2j * np.pi * np.outer(n, n) / N)


def unitary_mixed_basis(psi: GeneratorBank, A, z_shifts, grid: FrequencyGrid | None = None,
                        tol: float = 1e-10) -> GeneratorBank:
    """Orthonormal bank phi with cross spectra R_{phi psi}(w) = A Z(w).

    phi_l(t) = sum_r sum_n a_r^l[n] psi_r(t - nT) where the DTFT of a_r^l is
    conj(A[l, r]) * exp(j w z_r); then Z_r(w) = exp(-j w z_r).
    """
    A = np.asarray(A, dtype=complex)
    N = psi.count
    if A.shape != (N, N):
        raise ValueError(f"A must be {N}x{N}")
    if np.max(np.abs(A.conj().T @ A - np.eye(N))) > tol:
        raise NotUnitary("mixing matrix is not unitary")
    z = np.asarray(z_shifts)
    if z.shape != (N,) or np.any(z != np.round(z)):
        raise ValueError("z_shifts must be N integers")
    z = z.astype(int)
    K = psi.grid_size
    w = 2 * np.pi * np.arange(K) / K
    # coefficient spectra of the expansion, shape (l, r, K)
    coef = np.conj(A)[:, :, None] * np.exp(1j * np.outer(z, w))[None, :, :]
    spectra = np.einsum("lri,rki->lki", coef, psi.spectra)
    return GeneratorBank(psi.period, psi.shifts, spectra, name=f"mixed({psi.name})")


def change_basis(coeffs_in: CoeffSpectra, bank_from: GeneratorBank, bank_to: GeneratorBank,
                 grid: FrequencyGrid | None = None, tol: float = CHANGE_TOL) -> CoeffSpectra:
    """Re-express a signal given in ``bank_from`` coordinates in ``bank_to``.

    b(w) = M_{to,from}(w) a(w); requires both banks orthonormal and spanning
    the same space (the cross matrix is then unitary at every w).
    """
    for bank in (bank_from, bank_to):
        if not is_orthonormal(bank, grid, tol):
            raise NotOrthonormal(f"bank {bank.name or '?'} is not orthonormal")
    M = cross_spectrum(bank_to, bank_from, grid).values
    eye = np.eye(M.shape[1])
    dev = np.max(np.abs(np.conj(np.swapaxes(M, 1, 2)) @ M - eye))
    if M.shape[1] != M.shape[2] or dev > tol:
        raise NotUnitaryCross(f"banks do not span the same space (deviation {dev:.2e})")
    out = np.einsum("irc,ci->ri", M, coeffs_in.values)
    return CoeffSpectra(out, real=coeffs_in.real)


@dataclass(frozen=True)
class LpfTrainSignal:
    N: int
    T: float
    fourier_coeffs: CoeffSpectra
    spike_coeffs: CoeffSpectra
    active_fourier: tuple
    active_spike: tuple
    check: UncertaintyCheck
    coherence: float


def lpf_train_fourier_indices(N: int) -> list[int]:
    """0-based Fourier generators hit by a low-pass train with spacing 2*pi*sqrt(N)/T."""
    s = math.isqrt(N)
    ones = [2 * s * l for l in range(1, s // 2 + 1)]
    twos = [2 * s * (l - 1) + 1 for l in range(1, (s + 1) // 2 + 1)]
    return sorted(m - 1 for m in ones + twos)


def lpf_train(N: int, T: float, grid: FrequencyGrid, active_tol: float = 1e-8) -> LpfTrainSignal:
    """Band-limited train of unit low-pass pulses that meets the uncertainty bound.

    The pulses have width 2*pi/T and sit at multiples of 2*pi*sqrt(N)/T, so
    sqrt(N) Fourier generators describe the signal; its spike-basis
    coefficients are computed by a change of basis.
    """
    s = math.isqrt(N)
    if s * s != N:
        raise NotPerfectSquare(f"N={N} is not a perfect square")
    pair = spike_fourier_pair(N, T, grid)
    idx = lpf_train_fourier_indices(N)
    b = np.zeros((N, grid.size), dtype=complex)
    b[idx] = 1 / math.sqrt(T)
    fourier = CoeffSpectra(b, real=True)
    spike = change_basis(fourier, pair.fourier, pair.spike, grid)
    act_f = tuple(int(i) for i in fourier.active(active_tol))
    act_s = tuple(int(i) for i in spike.active(active_tol))
    mu = analog_coherence(pair.spike, pair.fourier, grid).mu
    check = uncertainty_check(len(act_s), len(act_f), mu)
    return LpfTrainSignal(N, float(T), fourier, spike, act_f, act_s, check, mu)
