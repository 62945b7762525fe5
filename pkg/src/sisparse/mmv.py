"""Finite joint-sparse recovery.

Exhaustive l0 search, an ADMM solver for the l2,1 program, Kruskal rank and
the continuous-to-finite reduction that turns a family of measurement
vectors into one finite system.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InconsistentSystem,
    NoSolution,
    NotConverged,
    TooLarge,
    ZeroColumn,
)
from .sispace import CoeffSpectra

EXHAUSTIVE_MAX = 24
SUPPORT_TOL = 1e-6
L0_RESIDUAL = 1e-8
KRUSKAL_TOL = 1e-10
RANK_TOL = 1e-10
CONSISTENCY_TOL = 1e-8
_CHUNK = 4096


@dataclass(frozen=True, eq=False)
class MmvProblem:
    D: np.ndarray
    X: np.ndarray

    def __post_init__(self):
        D = np.array(self.D)
        X = np.array(self.X)
        if X.ndim == 1:
            X = X[:, None]
        if D.ndim != 2 or X.ndim != 2:
            raise DimensionMismatch("D and X must be matrices")
        N, m = D.shape
        if N < 1 or m < N:
            raise DimensionMismatch(f"D must be N x m with m >= N >= 1, got {D.shape}")
        if X.shape[0] != N or X.shape[1] < 1:
            raise DimensionMismatch(f"X must have {N} rows and at least one column")
        if np.any(np.linalg.norm(D, axis=0) == 0):
            raise ZeroColumn("dictionary has a zero column")
        D.setflags(write=False)
        X.setflags(write=False)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "X", X)

    @property
    def N(self):
        return self.D.shape[0]

    @property
    def m(self):
        return self.D.shape[1]

    @property
    def p(self):
        return self.X.shape[1]


@dataclass(frozen=True, eq=False)
class MmvSolution:
    U: np.ndarray
    support: tuple
    row_norms: np.ndarray
    residual: float
    iterations: int
    converged: bool


@dataclass(frozen=True, eq=False)
class CtfOutput:
    Q: np.ndarray
    V: np.ndarray
    rank_threshold: float

    @property
    def rank(self):
        return self.V.shape[1]


def _solution(prob, U, support, iterations, converged):
    U = np.asarray(U)
    res = float(np.linalg.norm(prob.D @ U - prob.X))
    return MmvSolution(U, tuple(int(s) for s in support), np.linalg.norm(U, axis=1), res,
                       int(iterations), bool(converged))


def _subset_chunks(m, q):
    it = itertools.combinations(range(m), q)
    while True:
        block = list(itertools.islice(it, _CHUNK))
        if not block:
            return
        yield np.array(block, dtype=int).reshape(len(block), q)


def l0_oracle(prob: MmvProblem, k_max: int | None = None) -> MmvSolution:
    """Smallest row support reproducing X, by exhaustive search.

    Supports are visited by increasing size and, within one size, in
    lexicographic order; the first one with relative residual <= 1e-8 wins.
    """
    if prob.m > EXHAUSTIVE_MAX:
        raise TooLarge(f"exhaustive search limited to m <= {EXHAUSTIVE_MAX}, got {prob.m}")
    k_max = prob.m if k_max is None else int(k_max)
    if not 0 <= k_max <= prob.m:
        raise ValueError("k_max must lie in [0, m]")
    D, X = prob.D, prob.X
    dtype = np.result_type(D, X, float)
    bound = L0_RESIDUAL * np.linalg.norm(X)
    if np.linalg.norm(X) == 0:
        return _solution(prob, np.zeros((prob.m, prob.p), dtype=dtype), (), 0, True)
    for q in range(1, min(k_max, prob.N) + 1):
        for subsets in _subset_chunks(prob.m, q):
            Ds = np.transpose(D[:, subsets], (1, 0, 2))  # (B, N, q)
            coef = np.linalg.pinv(Ds) @ X  # (B, q, p)
            res = np.linalg.norm(Ds @ coef - X, axis=(1, 2))
            hits = np.flatnonzero(res <= bound)
            if hits.size:
                j = hits[0]
                U = np.zeros((prob.m, prob.p), dtype=dtype)
                U[subsets[j]] = coef[j]
                return _solution(prob, U, subsets[j], 0, True)
    raise NoSolution(f"no support of size <= {k_max} reproduces X")


def _row_shrink(V, tau):
    norms = np.linalg.norm(V, axis=1, keepdims=True)
    scale = np.maximum(1 - tau / np.maximum(norms, np.finfo(float).tiny), 0.0)
    return V * scale


def _support(U, rel_tol=SUPPORT_TOL):
    norms = np.linalg.norm(U, axis=1)
    top = norms.max() if norms.size else 0.0
    if top == 0:
        return np.array([], dtype=int)
    return np.flatnonzero(norms > rel_tol * top)


def l1_mmv_solve(prob: MmvProblem, tol: float = 1e-9, max_iter: int = 50000,
                 rho: float = 1.0) -> MmvSolution:
    """Minimize sum of row l2 norms of U subject to D U = X.

    ADMM splitting U = Z: U is projected onto the affine constraint set, Z
    takes row-wise shrinkage. X is scaled to unit Frobenius norm internally,
    so the result is equivariant under scaling of X. Once converged, the
    iterate is polished by least squares on its support when that support
    reproduces X exactly.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    D = prob.D
    scale = float(np.linalg.norm(prob.X))
    dtype = np.result_type(D, prob.X, float)
    if scale == 0:
        return _solution(prob, np.zeros((prob.m, prob.p), dtype=dtype), (), 0, True)
    X = prob.X / scale
    D_pinv = np.linalg.pinv(D)
    U_part = D_pinv @ X

    def project(V):
        return V - D_pinv @ (D @ V) + U_part

    Z = U_part.copy().astype(dtype)
    Y = np.zeros_like(Z)
    sqrt_n = math.sqrt(Z.size)
    r_norm = s_norm = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        U = project(Z - Y)
        Z_old = Z
        Z = _row_shrink(U + Y, 1.0 / rho)
        Y = Y + U - Z
        r_norm = np.linalg.norm(U - Z)
        s_norm = rho * np.linalg.norm(Z - Z_old)
        eps_pri = tol * (sqrt_n + max(np.linalg.norm(U), np.linalg.norm(Z)))
        eps_dual = tol * (sqrt_n + rho * np.linalg.norm(Y))
        if r_norm <= eps_pri and s_norm <= eps_dual:
            break
    else:
        best = _solution(prob, scale * project(Z), _support(Z), it, False)
        raise NotConverged(f"ADMM did not converge in {max_iter} iterations", best=best,
                           primal_residual=float(r_norm), dual_residual=float(s_norm))

    S = _support(Z)
    U = project(Z)
    if S.size:
        Ds = D[:, S]
        coef, *_ = np.linalg.lstsq(Ds, X, rcond=None)
        polished = np.zeros_like(U)
        polished[S] = coef
        if (np.linalg.norm(Ds @ coef - X) <= L0_RESIDUAL
                and np.linalg.matrix_rank(Ds) == S.size):
            U = polished
    return _solution(prob, scale * U, S, it, True)


def kruskal_rank(D) -> int:
    """Largest q such that every q columns of D are linearly independent."""
    D = np.asarray(D)
    N, m = D.shape
    if m > EXHAUSTIVE_MAX:
        raise TooLarge(f"exhaustive search limited to m <= {EXHAUSTIVE_MAX}, got {m}")
    if np.any(np.linalg.norm(D, axis=0) == 0):
        raise ZeroColumn("dictionary has a zero column")
    floor = KRUSKAL_TOL * np.linalg.norm(D, 2)
    rank = 0
    for q in range(1, min(N, m) + 1):
        for subsets in _subset_chunks(m, q):
            sv = np.linalg.svd(np.transpose(D[:, subsets], (1, 0, 2)), compute_uv=False)
            if np.any(sv[:, -1] <= floor):
                return rank
        rank = q
    return rank


def ctf_reduce(samples, grid=None, indices=None) -> CtfOutput:
    """Collapse a family of vectors to a finite frame V with V V^H = Q.

    ``samples`` is either a CoeffSpectra, giving Q = (1/K) sum_i c(w_i)c(w_i)^H
    over the grid (or over ``indices`` only), or an N x L array of time
    sequences, giving Q = sum_n c[n]c[n]^H. By Parseval both agree for
    sequences no longer than K.
    """
    if isinstance(samples, CoeffSpectra):
        C = samples.values
        if indices is not None:
            C = C[:, np.asarray(indices, dtype=int)]
        Q = C @ C.conj().T / samples.grid_size
    else:
        C = np.asarray(samples)
        if C.ndim == 1:
            C = C[:, None]
        if indices is not None:
            C = C[:, np.asarray(indices, dtype=int)]
        Q = C @ C.conj().T
    Q = 0.5 * (Q + Q.conj().T)
    lam, vec = np.linalg.eigh(Q)
    lam, vec = lam[::-1], vec[:, ::-1]
    top = lam[0] if lam.size else 0.0
    threshold = RANK_TOL * top
    keep = lam > threshold if top > 0 else np.zeros(lam.shape, dtype=bool)
    V = vec[:, keep] * np.sqrt(lam[keep])
    return CtfOutput(Q, V, float(threshold))


def support_recover(V, D, solver: str = "l1", **kwargs) -> tuple:
    """Row support of the sparsest solution of V = D U."""
    V = np.asarray(V)
    D = np.asarray(D)
    if V.ndim == 1:
        V = V[:, None]
    if V.shape[0] != D.shape[0]:
        raise DimensionMismatch("V and D must have the same number of rows")
    if V.shape[1] == 0 or np.linalg.norm(V) == 0:
        return ()
    fit = D @ (np.linalg.pinv(D) @ V)
    if np.linalg.norm(fit - V) > CONSISTENCY_TOL * np.linalg.norm(V):
        raise InconsistentSystem("columns of V are outside the span of D")
    prob = MmvProblem(D, V)
    if solver == "l1":
        return l1_mmv_solve(prob, **kwargs).support
    if solver == "l0":
        return l0_oracle(prob, **kwargs).support
    raise ValueError(f"unknown solver {solver!r}")
