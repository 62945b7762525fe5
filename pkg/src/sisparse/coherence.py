"""Discrete and analog coherence, and the uncertainty relation they bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CoherenceBoundViolation, DimensionMismatch, NotOrthonormal, ZeroColumn
from .sispace import FrequencyGrid, GeneratorBank, SpectralMatrix, cross_spectrum, is_orthonormal

BOUND_TOL = 1e-9
TIE_TOL = 1e-12


@dataclass(frozen=True)
class CoherenceReport:
    mu: float
    argmax_pair: tuple
    argmax_omega: float | None
    lower_bound: float
    upper_bound: float = 1.0

    def within_bounds(self, tol: float = BOUND_TOL) -> bool:
        return self.lower_bound - tol <= self.mu <= self.upper_bound + tol


@dataclass(frozen=True)
class UncertaintyCheck:
    A_count: int
    B_count: int
    geometric_mean: float
    arithmetic_mean: float
    bound: float
    satisfied: bool
    tight: bool


@dataclass(frozen=True)
class DictionaryCoherence:
    mu: float
    lower_bound: float
    argmax_pair: tuple


def _first_max(mags: np.ndarray):
    """Lexicographically smallest index whose value ties with the maximum."""
    top = mags.max()
    flat = np.flatnonzero(mags.ravel() >= top - TIE_TOL * max(top, 1.0))[0]
    return float(top), np.unravel_index(flat, mags.shape)


def _has_orthonormal_columns(B, tol):
    return np.max(np.abs(B.conj().T @ B - np.eye(B.shape[1]))) <= tol


def discrete_coherence(basis_a, basis_b, tol: float = 1e-10) -> CoherenceReport:
    """max |<a_l, b_r>| over column pairs of two orthonormal N x N bases."""
    a = np.asarray(basis_a)
    b = np.asarray(basis_b)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape != b.shape:
        raise DimensionMismatch("bases must be square matrices of equal size")
    for name, m in (("basis_a", a), ("basis_b", b)):
        if not _has_orthonormal_columns(m, tol):
            raise NotOrthonormal(f"{name} does not have orthonormal columns")
    mags = np.abs(a.conj().T @ b)
    mu, (l, r) = _first_max(mags)
    return CoherenceReport(mu, (int(l), int(r)), None, 1 / math.sqrt(a.shape[0]))


def analog_coherence(bank_a: GeneratorBank, bank_b: GeneratorBank,
                     grid: FrequencyGrid | None = None, tol: float = 1e-8) -> CoherenceReport:
    """max over generator pairs and grid points of |R_{phi_l psi_r}(w)|.

    Raises CoherenceBoundViolation when the grid maximum leaves [1/sqrt(N), 1]
    by more than 1e-9; that only happens when the banks are not two
    orthonormal bases of one space or the grid misses the spectra.
    """
    for bank in (bank_a, bank_b):
        if not is_orthonormal(bank, grid, tol):
            raise NotOrthonormal(f"bank {bank.name or '?'} is not orthonormal")
    R = np.abs(cross_spectrum(bank_a, bank_b, grid).values)  # (K, l, r)
    mu, (l, r, i) = _first_max(np.transpose(R, (1, 2, 0)))
    omega = 2 * np.pi * int(i) / R.shape[0]
    rep = CoherenceReport(mu, (int(l), int(r)), omega, 1 / math.sqrt(bank_a.count))
    if not rep.within_bounds():
        raise CoherenceBoundViolation(
            f"coherence {mu:.12g} outside [{rep.lower_bound:.12g}, 1]; "
            "the banks may span different spaces"
        )
    return rep


def welch_bound(N: int, m: int) -> float:
    """General lower bound on the coherence of an N x m dictionary."""
    if m <= 1:
        return 0.0
    return math.sqrt(max(m - N, 0) / (N * (m - 1)))


def dictionary_coherence(D) -> DictionaryCoherence:
    """Normalized maximal off-diagonal Gram magnitude of a dictionary.

    ``D`` is a constant N x m matrix or a SpectralMatrix, in which case the
    maximum over grid points is reported.
    """
    mats = D.values if isinstance(D, SpectralMatrix) else np.asarray(D)[None]
    norms = np.linalg.norm(mats, axis=1)
    if np.any(norms == 0):
        raise ZeroColumn("dictionary has a zero column")
    N, m = mats.shape[1], mats.shape[2]
    if m < 2:
        return DictionaryCoherence(0.0, welch_bound(N, m), (0, 0))
    G = np.abs(np.conj(np.swapaxes(mats, 1, 2)) @ mats) / (norms[:, :, None] * norms[:, None, :])
    G[:, np.arange(m), np.arange(m)] = 0.0
    mu, (_, l, r) = _first_max(G)
    return DictionaryCoherence(mu, welch_bound(N, m), (int(l), int(r)))


def two_basis_coherence(A) -> float:
    """mu(I, A) for a unitary A, i.e. max |A_ij|."""
    return float(np.max(np.abs(np.asarray(A))))


def uncertainty_check(A_count: int, B_count: int, mu: float, tol: float = BOUND_TOL) -> UncertaintyCheck:
    if not 0 < mu <= 1 + tol:
        raise ValueError(f"mu must lie in (0, 1], got {mu}")
    geo = math.sqrt(A_count * B_count)
    arith = 0.5 * (A_count + B_count)
    bound = 1 / mu
    satisfied = geo >= bound - tol
    tight = abs(geo - bound) <= tol and abs(arith - geo) <= tol
    return UncertaintyCheck(int(A_count), int(B_count), geo, arith, bound, satisfied, tight)
