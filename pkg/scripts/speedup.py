"""Wall-clock comparison of the fast algorithms against the QR-based baseline.

Baselines run at ``p = (q - 2) / 2`` so both sides make the same number of
passes over the matrix.
"""
from __future__ import annotations

import argparse
import statistics
import time
from dataclasses import dataclass

from frpca.randsvd import PcaConfig, basic_rpca, frpcat
from frpca.sparse import nnz_stats
from frpca.synthetic import random_sparse
from frpca.flops import sp1_limit, speedup_sp1


@dataclass(frozen=True)
class SpeedupConfig:
    size: int = 50_000
    nnz_per_row: int = 10
    k: int = 100
    s: int = 5
    q_list: tuple = (4, 8, 12)
    repeats: int = 3
    seed: int = 909


def timed(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=SpeedupConfig.size)
    ap.add_argument("--nnz-per-row", type=int, default=SpeedupConfig.nnz_per_row)
    ap.add_argument("--repeats", type=int, default=SpeedupConfig.repeats)
    args = ap.parse_args()
    cfg = SpeedupConfig(size=args.size, nnz_per_row=args.nnz_per_row, repeats=args.repeats)
    A = random_sparse(cfg.size, cfg.size, cfg.nnz_per_row, seed=cfg.seed)
    st = nnz_stats(A, cfg.k + cfg.s)
    warm = random_sparse(500, 500, 10, seed=1)
    frpcat(warm, PcaConfig(k=cfg.k, q=4))
    basic_rpca(warm, PcaConfig(k=cfg.k, p=1))
    print(f"{cfg.size} x {cfg.size}, nnz={A.nnz}, alpha={st.alpha:.4f}, beta={st.beta:.4f}")
    print("q   frpcat_s  basic_s  speedup  model_full  model_limit")
    for q in cfg.q_list:
        fast = timed(lambda: frpcat(A, PcaConfig(k=cfg.k, s=cfg.s, q=q)), cfg.repeats)
        base = timed(lambda: basic_rpca(A, PcaConfig(k=cfg.k, s=cfg.s, p=(q - 2) // 2)), cfg.repeats)
        print(f"{q:<3} {fast:8.3f} {base:8.3f} {base / fast:8.2f} "
              f"{speedup_sp1(st.alpha, st.beta, q):10.3f} {sp1_limit(st.alpha, st.beta):11.3f}")


if __name__ == "__main__":
    main()
