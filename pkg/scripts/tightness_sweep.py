"""Sweep N over perfect squares and check that the low-pass train meets
the uncertainty bound with equality."""

import argparse
from dataclasses import dataclass

from sisparse.bases import lpf_train
from sisparse.sispace import FrequencyGrid


@dataclass
class Config:
    roots: tuple = (2, 3, 4, 5, 6)
    K: int = 256
    T: float = 1.0


def main(cfg: Config):
    grid = FrequencyGrid(cfg.K)
    print(f"{'N':>4} {'A':>3} {'B':>3} {'sqrt(AB)':>9} {'1/mu':>9}  tight")
    for r in cfg.roots:
        sig = lpf_train(r * r, cfg.T, grid)
        c = sig.check
        print(f"{r * r:>4} {c.A_count:>3} {c.B_count:>3} {c.geometric_mean:>9.6f} {c.bound:>9.6f}  {c.tight}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--k", type=int, default=Config.K)
    p.add_argument("--roots", type=int, nargs="+", default=list(Config.roots))
    args = p.parse_args()
    main(Config(roots=tuple(args.roots), K=args.k))
