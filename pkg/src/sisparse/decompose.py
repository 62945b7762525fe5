"""Analog sparse decomposition pipelines.

A dictionary is handled through its sampled cross spectrum with a sampler
bank, M(w) = R_{h d}(w).  When M(w) = W(w) A Z(w) with a constant A and
diagonal linear-phase W, Z the joint support is found from one finite MMV
system built on A; otherwise the caller may fall back to solving the
problem at a handful of frequencies (the rich path).

Linear phases are fitted in the principal angle w~ in (-pi, pi].  Some
dictionaries (the spike-Fourier pair, even-N sinc frames) only factor on
each half of the circle separately because the replica that lands in a
given band changes at w~ = 0; each half then carries its own A.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .coherence import analog_coherence, dictionary_coherence
from .errors import (
    ConditionViolated,
    DimensionMismatch,
    InconsistentSystem,
    NotOrthonormal,
    RankDeficientAtFrequency,
    SamplerNotBasis,
    StructureNotConstant,
)
from .mmv import ctf_reduce, support_recover
from .sispace import (
    CoeffSpectra,
    FrequencyGrid,
    GeneratorBank,
    SpectralMatrix,
    cross_spectrum,
    gram_matrix,
    is_orthonormal,
    riesz_bounds,
)

STRUCTURE_TOL = 1e-8
ZERO_TOL = 1e-12
SNAP_TOL = 1e-9
RANK_TOL = 1e-10
RESIDUAL_TOL = 1e-6
SAMPLER_TOL = 1e-10
L1_CONSTANT = math.sqrt(2) - 0.5


@dataclass(frozen=True, eq=False)
class ConstantFactorization:
    """M(w_i) = W(w_i) A Z(w_i) on the grid points ``indices``.

    W_l = exp(j w~ w_shifts[l]) and Z_r = exp(-j w~ z_shifts[r]).
    """

    A: np.ndarray
    z_shifts: np.ndarray
    w_shifts: np.ndarray
    indices: np.ndarray
    omega: np.ndarray
    detected: bool
    max_deviation: float

    @property
    def W(self) -> np.ndarray:
        """Diagonals of W at each segment point, shape (len(indices), N)."""
        return np.exp(1j * np.outer(self.omega, self.w_shifts))

    @property
    def Z(self) -> np.ndarray:
        return np.exp(-1j * np.outer(self.omega, self.z_shifts))

    @property
    def has_w(self) -> bool:
        return bool(np.any(self.w_shifts != 0))


@dataclass(frozen=True, eq=False)
class JointSparseSolution:
    support: tuple
    gamma: CoeffSpectra
    residual: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.support)

    @property
    def gamma_S(self) -> np.ndarray:
        return self.gamma.values[list(self.support)]


def _component_gauge(nonzero):
    """Per connected component of the row/column graph, its lowest column."""
    n, m = nonzero.shape
    label = -np.ones(n + m, dtype=int)
    for start in range(n, n + m):
        if label[start] >= 0:
            continue
        label[start] = start
        stack = [start]
        while stack:
            v = stack.pop()
            nbrs = (np.flatnonzero(nonzero[:, v - n]) if v >= n
                    else n + np.flatnonzero(nonzero[v]))
            for u in nbrs:
                if label[u] < 0:
                    label[u] = start
                    stack.append(u)
    return sorted({int(lab) - n for lab in label[n:]})


def _fit_slopes(vals, omega):
    """Mean phase slope of each entry over angle-sorted points; NaN for zero entries."""
    mags = np.abs(vals)
    scale = mags.max() if mags.size else 0.0
    nonzero = np.all(mags > ZERO_TOL * max(scale, 1.0), axis=0)
    slopes = np.full(vals.shape[1:], np.nan)
    if len(omega) < 2:
        slopes[nonzero] = 0.0
        return slopes, nonzero
    ratio = vals[1:] * np.conj(vals[:-1])
    dphi = np.angle(ratio) / np.diff(omega)[:, None, None]
    slopes[nonzero] = dphi.mean(axis=0)[nonzero]
    return slopes, nonzero


def detect_constant_structure(M: SpectralMatrix, grid: FrequencyGrid | None = None,
                              indices=None, tol: float = STRUCTURE_TOL) -> ConstantFactorization:
    """Fit M(w) = W(w) A Z(w) with linear-phase diagonals on a set of grid points.

    ``indices`` defaults to the whole circle.  Delays are fitted from mean
    phase increments of each nonzero entry, giving w_l - z_r; these are
    solved in least squares with the lowest column of every connected block
    fixed at z = 0.  A is then the average of W^-1 M Z^-1, and the fit is
    accepted when the worst entrywise deviation is at most ``tol``.
    """
    K = M.grid_size
    grid = FrequencyGrid(K) if grid is None else grid
    if grid.size != K:
        raise DimensionMismatch("spectral matrix does not live on this grid")
    idx = grid.by_angle(indices)
    omega = grid.principal[idx]
    vals = M.values[idx]
    n, m = M.rows, M.cols

    slopes, nonzero = _fit_slopes(vals, omega)
    rows = []
    rhs = []
    for l, r in zip(*np.nonzero(nonzero)):
        e = np.zeros(n + m)
        e[l], e[n + r] = 1.0, -1.0
        rows.append(e)
        rhs.append(slopes[l, r])
    for r in _component_gauge(nonzero):
        e = np.zeros(n + m)
        e[n + r] = 1.0
        rows.append(e)
        rhs.append(0.0)
    sol, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    # delays that are integers up to rounding noise are reported exactly
    near = np.abs(sol - np.round(sol)) <= SNAP_TOL
    sol = np.where(near, np.round(sol), sol) + 0.0
    w_shifts, z_shifts = sol[:n], sol[n:]
    # rows without nonzero entries are unconstrained; min-norm puts them at 0

    Wd = np.exp(1j * np.outer(omega, w_shifts))
    Zd = np.exp(-1j * np.outer(omega, z_shifts))
    A = np.mean(np.conj(Wd)[:, :, None] * vals * np.conj(Zd)[:, None, :], axis=0)
    fitted = Wd[:, :, None] * A[None] * Zd[:, None, :]
    dev = float(np.max(np.abs(fitted - vals))) if vals.size else 0.0
    return ConstantFactorization(A, z_shifts, w_shifts, idx, omega, dev <= tol, dev)


def detect_segmented(M: SpectralMatrix, grid: FrequencyGrid | None = None,
                     tol: float = STRUCTURE_TOL) -> tuple:
    """Whole-circle factorization, or one per half circle when that fails."""
    grid = FrequencyGrid(M.grid_size) if grid is None else grid
    full = detect_constant_structure(M, grid, tol=tol)
    if full.detected:
        return (full,)
    return tuple(detect_constant_structure(M, grid, half, tol=tol)
                 for half in (grid.upper_half(), grid.lower_half()))


def _relative_residual(M, gamma, samples):
    c = samples.values
    fit = np.einsum("irc,ci->ri", M.values, gamma.values)
    norm = np.linalg.norm(c)
    err = np.linalg.norm(fit - c)
    return float(err / norm) if norm > 0 else float(err)


def recover_on_support(dict_spectrum: SpectralMatrix, S, samples: CoeffSpectra,
                       grid: FrequencyGrid | None = None) -> CoeffSpectra:
    """Pointwise least squares gamma_S(w) = D_S(w)^+ c(w), zero off S."""
    K, n, m = dict_spectrum.values.shape
    if samples.count != n or samples.grid_size != K:
        raise DimensionMismatch("samples do not match the dictionary")
    if grid is not None and grid.size != K:
        raise DimensionMismatch("spectral matrix does not live on this grid")
    S = [int(s) for s in S]
    out = np.zeros((m, K), dtype=complex)
    if not S:
        return CoeffSpectra(out)
    Ds = dict_spectrum.values[:, :, S]
    u, s, vh = np.linalg.svd(Ds, full_matrices=False)
    bad = np.flatnonzero((s[:, -1] <= RANK_TOL * s[:, 0]) | (s[:, 0] == 0))
    if bad.size:
        i = int(bad[0])
        omega = 2 * np.pi * i / K
        raise RankDeficientAtFrequency(
            f"columns {S} are rank deficient at omega_{i} = {omega:.6f}", omega=omega, index=i)
    proj = np.einsum("ikr,ki->ir", np.conj(u), samples.values) / s
    out[S] = np.einsum("isr,is->ri", np.conj(vh), proj)
    return CoeffSpectra(out)


def _warn_if(flag, message):
    if not flag:
        warnings.warn(message, ConditionViolated, stacklevel=3)


def _constant_pipeline(M, samples, grid, solver, segments):
    """Joint support and spectra for M = W A Z given per-segment factorizations."""
    K, n, m = M.values.shape
    c = samples.values
    support = set()
    ranks = []
    for seg in segments:
        d = c[:, seg.indices] * np.conj(seg.W).T
        ctf = ctf_reduce(d)
        ranks.append(ctf.rank)
        support.update(support_recover(ctf.V, seg.A, solver))
    S = sorted(support)

    gamma = np.zeros((m, K), dtype=complex)
    if S:
        for seg in segments:
            A_S = seg.A[:, S]
            if np.linalg.matrix_rank(A_S, tol=RANK_TOL * np.linalg.norm(A_S, 2)) < len(S):
                raise InconsistentSystem(f"recovered support {S} is not identifiable")
            d = c[:, seg.indices] * np.conj(seg.W).T
            coef = np.linalg.pinv(A_S) @ d
            gamma_seg = coef * np.conj(seg.Z[:, S]).T
            for j, s in enumerate(S):
                gamma[s, seg.indices] = gamma_seg[j]
    gamma = CoeffSpectra(gamma)
    residual = _relative_residual(M, gamma, samples)
    if residual > RESIDUAL_TOL:
        raise InconsistentSystem(f"relative residual {residual:.3e} exceeds {RESIDUAL_TOL}")
    return tuple(S), gamma, residual, ranks


def _segment_summary(segments):
    return {
        "segments": len(segments),
        "max_deviation": max(seg.max_deviation for seg in segments),
        "z_shifts": [seg.z_shifts.tolist() for seg in segments],
        "w_shifts": [seg.w_shifts.tolist() for seg in segments],
    }


def _require_structure(M, grid):
    segments = detect_segmented(M, grid)
    if not all(seg.detected for seg in segments):
        worst = max(seg.max_deviation for seg in segments)
        raise StructureNotConstant(
            f"no constant factorization W A Z (max deviation {worst:.3e})")
    return segments


def decompose_two_onb_constant(phi: GeneratorBank, psi: GeneratorBank, samples: CoeffSpectra,
                               grid: FrequencyGrid | None = None, solver: str = "l1",
                               tol: float = 1e-8) -> JointSparseSolution:
    """Sparsest representation of a signal in the union of two orthonormal banks.

    ``samples`` are c_l = <phi_l(t - nT), x(t)>.  The dictionary seen by
    these samples is [I  M_{phi psi}(w)]; support indices 0..N-1 refer to
    phi, N..2N-1 to psi.
    """
    for bank in (phi, psi):
        if not is_orthonormal(bank, grid, tol):
            raise NotOrthonormal(f"bank {bank.name or '?'} is not orthonormal")
    grid = FrequencyGrid(phi.grid_size) if grid is None else grid
    N = phi.count
    M = cross_spectrum(phi, phi.concat(psi), grid)
    segments = _require_structure(M, grid)
    S, gamma, residual, ranks = _constant_pipeline(M, samples, grid, solver, segments)

    mu = analog_coherence(phi, psi, grid).mu
    k = len(S)
    l1_ok = k < L1_CONSTANT / mu
    unique = k < 1 / mu
    _warn_if(l1_ok, f"k = {k} does not satisfy k < (sqrt(2) - 0.5)/mu = {L1_CONSTANT / mu:.4f}")
    diag = {
        "pipeline": "constant",
        "solver": solver,
        "mu": mu,
        "k": k,
        "k_phi": sum(1 for s in S if s < N),
        "k_psi": sum(1 for s in S if s >= N),
        "l1_bound": L1_CONSTANT / mu,
        "l1_condition": l1_ok,
        "uniqueness_condition": unique,
        "ctf_rank": ranks,
        "factorization": _segment_summary(segments),
    }
    return JointSparseSolution(S, gamma, residual, diag)


def select_frequencies(grid: FrequencyGrid, count: int, seed: int = 0) -> np.ndarray:
    """One index drawn from each of ``count`` contiguous strata of the grid."""
    if not 1 <= count <= grid.size:
        raise ValueError(f"count must lie in [1, {grid.size}]")
    rng = np.random.default_rng(seed)
    edges = np.linspace(0, grid.size, count + 1).round().astype(int)
    return np.array([rng.integers(lo, hi) for lo, hi in zip(edges[:-1], edges[1:])])


def decompose_rich(dict_spectrum: SpectralMatrix, samples: CoeffSpectra,
                   grid: FrequencyGrid | None = None, M_freqs: int | None = None,
                   seed: int = 0, solver: str = "l1") -> JointSparseSolution:
    """Support from a few frequencies, spectra on the whole grid.

    Each selected frequency gives a single-vector sparse problem; the union
    of their supports is taken as the joint support.  This is only correct
    when those frequencies already reveal every active generator.
    """
    K, n, m = dict_spectrum.values.shape
    grid = FrequencyGrid(K) if grid is None else grid
    M_freqs = 2 * n if M_freqs is None else int(M_freqs)
    freqs = select_frequencies(grid, M_freqs, seed)
    support = set()
    for i in freqs:
        support.update(support_recover(samples.values[:, i], dict_spectrum.values[i], solver))
    S = tuple(sorted(support))
    gamma = recover_on_support(dict_spectrum, S, samples, grid)
    residual = _relative_residual(dict_spectrum, gamma, samples)
    if residual > RESIDUAL_TOL:
        raise InconsistentSystem(
            f"union support {list(S)} leaves relative residual {residual:.3e}; "
            "the selected frequencies do not reveal the full support")
    diag = {
        "pipeline": "rich",
        "solver": solver,
        "k": len(S),
        "frequencies": [int(i) for i in freqs],
        "seed": int(seed),
    }
    return JointSparseSolution(S, gamma, residual, diag)


def decompose_frame(frame_dict: GeneratorBank, sampler: GeneratorBank, samples: CoeffSpectra,
                    grid: FrequencyGrid | None = None, solver: str = "l1") -> JointSparseSolution:
    """Sparse expansion of a signal over the shifts of an overcomplete bank.

    ``samples`` are c_l = <h_l(t - nT), x(t)> for a sampler bank h that is a
    Riesz basis of the space; the dictionary seen by them is M_{hd}(w).
    """
    grid = FrequencyGrid(sampler.grid_size) if grid is None else grid
    bounds = riesz_bounds(gram_matrix(sampler, grid))
    if bounds.alpha <= SAMPLER_TOL:
        raise SamplerNotBasis(f"sampler lower Riesz bound {bounds.alpha:.3e} is not positive")
    M = cross_spectrum(sampler, frame_dict, grid)
    segments = _require_structure(M, grid)
    S, gamma, residual, ranks = _constant_pipeline(M, samples, grid, solver, segments)

    mu = max(dictionary_coherence(seg.A).mu for seg in segments)
    k = len(S)
    bound = 0.5 * (1 + 1 / mu) if mu > 0 else math.inf
    ok = k < bound
    _warn_if(ok, f"k = {k} does not satisfy k < (1 + 1/mu)/2 = {bound:.4f}")
    diag = {
        "pipeline": "frame",
        "solver": solver,
        "mu": mu,
        "k": k,
        "kruskal_bound": bound,
        "l1_condition": ok,
        "uniqueness_condition": ok,
        "ctf_rank": ranks,
        "factorization": _segment_summary(segments),
    }
    return JointSparseSolution(S, gamma, residual, diag)
