"""Sampled-spectrum representation of finitely generated shift-invariant spaces.

Every statement "for all omega" is evaluated on a uniform grid of K points
``omega_i = 2*pi*i/K`` in ``[0, 2*pi)``.  A generator phi(t) with Fourier
transform Phi(Omega) is stored through its replicas

    Phi((omega_i - 2*pi*k) / T),   k in ``shifts``,

which is exactly what the periodized sums (cross-correlation spectra, Gram
matrices) need.  Coefficient sequences of length <= K are embedded exactly
through a K-point DFT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    MismatchedBanks,
    NotHermitian,
    TooLong,
)

DEFAULT_K = 256
STRUCTURE_TOL = 1e-10


def _frozen(a, dtype=None):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FrequencyGrid:
    """K uniform samples of the 2*pi-periodic DTFT axis."""

    size: int = DEFAULT_K

    def __post_init__(self):
        k = self.size
        if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
            raise ValueError(f"grid size must be an integer, got {k!r}")
        if k < 2 or k % 2:
            raise ValueError(f"grid size must be even and >= 2, got {k}")

    @property
    def points(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.size) / self.size

    @property
    def principal(self) -> np.ndarray:
        """Grid angles mapped to (-pi, pi]."""
        i = np.arange(self.size)
        i = np.where(2 * i > self.size, i - self.size, i)
        return 2 * np.pi * i / self.size

    @property
    def step(self) -> float:
        return 2 * np.pi / self.size

    def upper_half(self) -> np.ndarray:
        """Indices with principal angle in (0, pi]."""
        return np.arange(1, self.size // 2 + 1)

    def lower_half(self) -> np.ndarray:
        """Indices with principal angle in (-pi, 0], ordered by angle."""
        return np.concatenate([np.arange(self.size // 2 + 1, self.size), [0]])

    def by_angle(self, indices=None) -> np.ndarray:
        """Sort grid indices by principal angle."""
        idx = np.arange(self.size) if indices is None else np.asarray(indices)
        return idx[np.argsort(self.principal[idx], kind="stable")]


def band_shifts(N: int) -> np.ndarray:
    """Replica indices k that reach the band (-pi*N/T, pi*N/T] from [0, 2*pi).

    Exactly N of the returned N + 1 replicas are inside the band at any grid
    point; which N depends on the point.
    """
    lo = -(N // 2)
    hi = math.ceil(N / 2 + 1)
    return np.arange(lo, hi)


@dataclass(frozen=True, eq=False)
class GeneratorBank:
    """N generators sharing period T, stored as replica spectra on a grid.

    ``spectra[l, b, i]`` holds Phi_l((omega_i - 2*pi*shifts[b]) / T).
    """

    period: float
    shifts: np.ndarray
    spectra: np.ndarray
    name: str = ""

    def __post_init__(self):
        spectra = np.asarray(self.spectra, dtype=complex)
        if spectra.ndim != 3:
            raise ValueError("spectra must have shape (N, B, K)")
        shifts = np.asarray(self.shifts, dtype=int)
        if shifts.shape != (spectra.shape[1],):
            raise ValueError("one replica shift per stored replica is required")
        if not self.period > 0:
            raise ValueError("period must be positive")
        if not np.all(np.isfinite(spectra)):
            raise ValueError("generator spectra contain non-finite values")
        object.__setattr__(self, "spectra", _frozen(spectra))
        object.__setattr__(self, "shifts", _frozen(shifts))
        object.__setattr__(self, "period", float(self.period))

    @property
    def count(self) -> int:
        return self.spectra.shape[0]

    @property
    def replica_count(self) -> int:
        return self.spectra.shape[1]

    @property
    def grid_size(self) -> int:
        return self.spectra.shape[2]

    @classmethod
    def from_function(cls, func, count, period, grid, shifts, name=""):
        """Tabulate ``func(l, u, K)`` for generators l = 0..count-1.

        ``u = i - k*K`` is the integer replica coordinate, so the continuous
        frequency is ``Omega = 2*pi*u / (K*T)``.  Working in integers keeps band
        edges exact.
        """
        shifts = np.asarray(shifts, dtype=int)
        K = grid.size
        u = np.arange(K)[None, :] - shifts[:, None] * K
        spectra = np.stack([np.broadcast_to(func(l, u, K), u.shape) for l in range(count)])
        return cls(period, shifts, spectra, name)

    def energy(self) -> np.ndarray:
        """Energy of each generator by Riemann sum over the stored replicas."""
        dOmega = 2 * np.pi / (self.grid_size * self.period)
        return np.sum(np.abs(self.spectra) ** 2, axis=(1, 2)) * dOmega / (2 * np.pi)

    def scaled(self, index: int, factor) -> "GeneratorBank":
        spectra = np.array(self.spectra)
        spectra[index] *= factor
        return GeneratorBank(self.period, self.shifts, spectra, self.name)

    def select(self, indices) -> "GeneratorBank":
        return GeneratorBank(self.period, self.shifts, self.spectra[list(indices)], self.name)

    def concat(self, other: "GeneratorBank") -> "GeneratorBank":
        _check_compatible(self, other)
        spectra = np.concatenate([self.spectra, other.spectra])
        return GeneratorBank(self.period, self.shifts, spectra, f"{self.name}+{other.name}")

    def time_values(self, t) -> np.ndarray:
        """Evaluate the generators at times ``t`` from the stored spectra.

        Uses the Riemann sum of the inverse Fourier integral over the stored
        replica frequencies; exact for band-limited spectra at lattice times
        commensurate with the grid.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        K, T = self.grid_size, self.period
        u = (np.arange(K)[None, :] - self.shifts[:, None] * K).ravel()
        Omega = 2 * np.pi * u / (K * T)
        dOmega = 2 * np.pi / (K * T)
        kernel = np.exp(1j * np.outer(Omega, t))
        vals = self.spectra.reshape(self.count, -1) @ kernel
        return vals * dOmega / (2 * np.pi)


def _check_compatible(a: GeneratorBank, b: GeneratorBank):
    if a.period != b.period:
        raise MismatchedBanks(f"periods differ: {a.period} vs {b.period}")
    if a.grid_size != b.grid_size:
        raise MismatchedBanks(f"grid sizes differ: {a.grid_size} vs {b.grid_size}")
    if a.shifts.shape != b.shifts.shape or np.any(a.shifts != b.shifts):
        raise MismatchedBanks("replica shifts differ")


@dataclass(frozen=True, eq=False)
class SpectralMatrix:
    """A matrix-valued function on the grid; ``values[i]`` is the matrix at omega_i."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 3:
            raise ValueError("values must have shape (K, rows, cols)")
        if not np.all(np.isfinite(v)):
            raise ValueError("spectral matrix has non-finite entries")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def rows(self) -> int:
        return self.values.shape[1]

    @property
    def cols(self) -> int:
        return self.values.shape[2]

    @property
    def grid_size(self) -> int:
        return self.values.shape[0]

    @classmethod
    def constant(cls, matrix, grid: FrequencyGrid) -> "SpectralMatrix":
        m = np.asarray(matrix, dtype=complex)
        return cls(np.broadcast_to(m, (grid.size,) + m.shape))

    def hstack(self, other: "SpectralMatrix") -> "SpectralMatrix":
        return SpectralMatrix(np.concatenate([self.values, other.values], axis=2))

    def columns(self, idx) -> "SpectralMatrix":
        return SpectralMatrix(self.values[:, :, list(idx)])


@dataclass(frozen=True, eq=False)
class CoeffSpectra:
    """Vector of DTFTs on the grid; ``values[l, i]`` is sequence l at omega_i."""

    values: np.ndarray
    real: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 2:
            raise ValueError("values must have shape (count, K)")
        if not np.all(np.isfinite(v)):
            raise ValueError("coefficient spectra have non-finite entries")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def count(self) -> int:
        return self.values.shape[0]

    @property
    def grid_size(self) -> int:
        return self.values.shape[1]

    @classmethod
    def zeros(cls, count, grid: FrequencyGrid) -> "CoeffSpectra":
        return cls(np.zeros((count, grid.size)), real=True)

    def norms(self) -> np.ndarray:
        """l2 norm of each underlying sequence (Parseval on the grid)."""
        return np.sqrt(np.mean(np.abs(self.values) ** 2, axis=1))

    def active(self, rel_tol: float = 1e-8) -> np.ndarray:
        """Indices of sequences that are not numerically zero."""
        n = self.norms()
        top = n.max(initial=0.0)
        if top == 0:
            return np.array([], dtype=int)
        return np.flatnonzero(n > rel_tol * top)

    def conjugate_symmetry_error(self) -> float:
        v = self.values
        mirrored = v[:, (-np.arange(v.shape[1])) % v.shape[1]]
        return float(np.max(np.abs(v - np.conj(mirrored)), initial=0.0))

    def __add__(self, other):
        return CoeffSpectra(self.values + other.values, self.real and other.real)

    def __mul__(self, c):
        return CoeffSpectra(self.values * c, self.real and np.isrealobj(c))

    __rmul__ = __mul__


@dataclass(frozen=True)
class RieszBounds:
    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or self.alpha > self.beta:
            raise ValueError(f"invalid Riesz bounds ({self.alpha}, {self.beta})")

    @property
    def is_riesz_basis(self) -> bool:
        return self.alpha > STRUCTURE_TOL


# --- operations ---------------------------------------------------------------

def cross_spectrum(bank_a: GeneratorBank, bank_b: GeneratorBank,
                   grid: FrequencyGrid | None = None) -> SpectralMatrix:
    """Sampled cross-correlation spectra between two banks.

    Entry (l, r) at omega_i is (1/T) * sum_k conj(Phi_l) * Psi_r over the
    stored replicas, i.e. the DTFT of <phi_l(t - nT), psi_r(t)>.
    """
    _check_compatible(bank_a, bank_b)
    if grid is not None and grid.size != bank_a.grid_size:
        raise MismatchedBanks("grid does not match the banks")
    vals = np.einsum("lki,rki->ilr", np.conj(bank_a.spectra), bank_b.spectra) / bank_a.period
    return SpectralMatrix(vals)


def gram_matrix(bank: GeneratorBank, grid: FrequencyGrid | None = None) -> SpectralMatrix:
    return cross_spectrum(bank, bank, grid)


def hermitian_error(m: SpectralMatrix) -> float:
    v = m.values
    return float(np.max(np.abs(v - np.conj(np.swapaxes(v, 1, 2))), initial=0.0))


def riesz_bounds(gram: SpectralMatrix, grid: FrequencyGrid | None = None,
                 tol: float = STRUCTURE_TOL) -> RieszBounds:
    """Extreme eigenvalues of the Gram matrix over the grid.

    alpha > 0 means the shifts form a Riesz basis (on the grid); alpha == 0
    with beta > 0 means at most a frame for their span.
    """
    if gram.rows != gram.cols:
        raise DimensionMismatch("Gram matrix must be square")
    err = hermitian_error(gram)
    if err > tol:
        raise NotHermitian(f"Gram matrix asymmetry {err:.3e} exceeds {tol:.1e}")
    v = gram.values
    v = 0.5 * (v + np.conj(np.swapaxes(v, 1, 2)))
    eig = np.linalg.eigvalsh(v)
    alpha = float(eig[:, 0].min())
    beta = float(eig[:, -1].max())
    # eigenvalues of a PSD matrix may come out as -1e-17
    scale = max(beta, 1.0)
    if alpha < 0 and alpha > -tol * scale:
        alpha = 0.0
    beta = max(beta, 0.0)
    return RieszBounds(max(alpha, 0.0), max(beta, max(alpha, 0.0)))


def is_orthonormal(bank: GeneratorBank, grid: FrequencyGrid | None = None,
                   tol: float = STRUCTURE_TOL) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    g = gram_matrix(bank, grid).values
    return bool(np.max(np.abs(g - np.eye(bank.count))) <= tol)


def signal_norm(coeffs: CoeffSpectra, grid: FrequencyGrid | None = None) -> float:
    """l2 norm of the stacked coefficient sequences.

    Equals the L2 norm of the synthesized signal when the bank is orthonormal.
    """
    if grid is not None and grid.size != coeffs.grid_size:
        raise DimensionMismatch("coefficients do not live on this grid")
    return float(np.sqrt(np.sum(np.abs(coeffs.values) ** 2) / coeffs.grid_size))


def synthesize_samples(dictionary: SpectralMatrix, gamma: CoeffSpectra) -> CoeffSpectra:
    """Forward model c(omega) = D(omega) gamma(omega) at every grid point."""
    if dictionary.cols != gamma.count or dictionary.grid_size != gamma.grid_size:
        raise DimensionMismatch(
            f"dictionary is {dictionary.rows}x{dictionary.cols} on {dictionary.grid_size} points, "
            f"coefficients are {gamma.count} on {gamma.grid_size} points"
        )
    c = np.einsum("irc,ci->ri", dictionary.values, gamma.values)
    return CoeffSpectra(c)


def dtft(sequence, grid: FrequencyGrid) -> CoeffSpectra:
    """DTFT on the grid of one sequence (1-D) or a stack of sequences (2-D).

    Sequences are supported on n = 0..L-1 with L <= K.
    """
    x = np.atleast_2d(np.asarray(sequence))
    if x.shape[1] > grid.size:
        raise TooLong(f"sequence length {x.shape[1]} exceeds grid size {grid.size}")
    X = np.fft.fft(x, n=grid.size, axis=1)
    return CoeffSpectra(X, real=bool(np.isrealobj(x)))


def idtft(coeffs: CoeffSpectra, length: int | None = None, real: bool | None = None) -> np.ndarray:
    """Inverse of :func:`dtft`; returns a (count, length) array."""
    x = np.fft.ifft(coeffs.values, axis=1)
    if length is not None:
        x = x[:, :length]
    if real if real is not None else coeffs.real:
        x = x.real
    return x
