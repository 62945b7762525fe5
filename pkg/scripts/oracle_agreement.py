"""Empirical agreement between the l1 and l0 joint-sparse solvers on [I A]
as the support size grows past the coherence guarantee."""

import argparse
import math
from dataclasses import dataclass

import numpy as np

from sisparse.bases import dft_matrix, random_unitary
from sisparse.coherence import two_basis_coherence
from sisparse.mmv import MmvProblem, l0_oracle, l1_mmv_solve


@dataclass
class Config:
    N: int = 8
    trials: int = 40
    columns: int = 3
    seed: int = 0
    unitary: str = "dft"


def main(cfg: Config):
    rng = np.random.default_rng(cfg.seed)
    A = dft_matrix(cfg.N) / math.sqrt(cfg.N) if cfg.unitary == "dft" else random_unitary(cfg.N, rng)
    mu = two_basis_coherence(A)
    D = np.hstack([np.eye(cfg.N), A])
    print(f"N = {cfg.N}, mu = {mu:.4f}, guarantee k < {(math.sqrt(2) - 0.5) / mu:.3f}")
    print(f"{'k':>3} {'l1 = l0':>8} {'l1 = planted':>13}")
    for k in range(1, cfg.N + 1):
        same = planted = 0
        for _ in range(cfg.trials):
            S = tuple(sorted(int(s) for s in rng.choice(2 * cfg.N, k, replace=False)))
            G = np.zeros((2 * cfg.N, cfg.columns), dtype=complex)
            G[list(S)] = rng.standard_normal((k, cfg.columns)) + 1j * rng.standard_normal((k, cfg.columns))
            prob = MmvProblem(D, D @ G)
            s1 = l1_mmv_solve(prob).support
            same += s1 == l0_oracle(prob).support
            planted += s1 == S
        print(f"{k:>3} {same / cfg.trials:>8.2f} {planted / cfg.trials:>13.2f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=Config.N)
    p.add_argument("--trials", type=int, default=Config.trials)
    p.add_argument("--columns", type=int, default=Config.columns)
    p.add_argument("--seed", type=int, default=Config.seed)
    p.add_argument("--unitary", choices=("dft", "random"), default=Config.unitary)
    a = p.parse_args()
    main(Config(a.n, a.trials, a.columns, a.seed, a.unitary))
