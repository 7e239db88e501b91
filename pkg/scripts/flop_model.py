"""Predicted speedups for the MovieLens and SNAP dataset shapes.

Prints the three closed forms (full, large-q, q -> inf) with ``alpha = t/l``
and, for comparison, with ``alpha = t/k``.
"""
from __future__ import annotations

from dataclasses import dataclass

from frpca.flops import CostConstants, CostInputs, flops, sp1_limit, speedup_sp1, speedup_sp1_large_q


@dataclass(frozen=True)
class Dataset:
    name: str
    m: int
    n: int
    t: float
    reported: float


DATASETS = (Dataset("MovieLens", 270896, 45115, 97, 3.7), Dataset("SNAP", 82168, 82168, 12, 8.3))
K, S, Q = 100, 5, 12


def main() -> None:
    c = CostConstants(c_mul=1.0, c_qr=5.0)
    print("dataset    reported  alpha_over  full    large_q  limit   flop_ratio")
    for d in DATASETS:
        x = CostInputs(d.m, d.n, int(d.t * d.m), K, S, q=Q)
        ratio = flops("basic_rpca", x, c) / flops("frpcat", x, c)
        beta = d.n / d.m
        for label, denom in (("l", K + S), ("k", K)):
            alpha = d.t / denom
            print(f"{d.name:<10} {d.reported:<9} {label:<11} {speedup_sp1(alpha, beta, Q, c):<7.4f} "
                  f"{speedup_sp1_large_q(alpha, beta, Q, c):<8.4f} {sp1_limit(alpha, beta, c):<7.4f} "
                  f"{ratio:.4f}")
    print(f"limit at alpha=0, beta=1: {sp1_limit(0.0, 1.0, c)}")


if __name__ == "__main__":
    main()
