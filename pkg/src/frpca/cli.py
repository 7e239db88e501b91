"""``frpca`` command line: run, gen, sparsify, bench, model.

Exit codes: 0 success, 2 bad arguments, 3 I/O or parse error, 4 numerical
failure (rank deficiency, non-convergence, memory guard).
"""
from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
import time
import tracemalloc
from pathlib import Path

import numpy as np

from . import flops as fm
from .errors import ConvergenceError, MatrixMarketError, MemoryGuardError, RankDeficiencyError
from .mmio import load_matrix_market, write_matrix_market
from .randsvd import BASELINES, FAST, GRAM_LIMIT, PcaConfig, eig_svds, run_algorithm
from .sparse import sparsify
from .synthetic import parse_spectrum, random_sparse, spectral_sparse
from .validation import ORACLE_LIMIT, accuracy_report, oracle_svd

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4
NUMERIC_ERRORS = (RankDeficiencyError, ConvergenceError, MemoryGuardError)


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_csv(path, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(r if isinstance(r, str) else _fmt(r) if isinstance(r, float) else str(r)
                              for r in row) + "\n")


def write_matrix_csv(path, M: np.ndarray, prefix: str) -> None:
    header = ",".join(f"{prefix}{j + 1}" for j in range(M.shape[1]))
    np.savetxt(path, M, fmt="%.17g", delimiter=",", header=header, comments="")


def set_threads(n: int | None) -> None:
    if n is None:
        env = os.environ.get("FRPCA_THREADS")
        n = int(env) if env else None
    if n is None:
        return
    if n < 1:
        raise UsageError("--threads must be >= 1")
    import numba

    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return
    threadpool_limits(n)


def _config(args, algorithm: str) -> PcaConfig:
    q, p = args.q, args.p
    if algorithm in FAST and q is None:
        raise UsageError(f"--algorithm {algorithm} needs --q")
    if algorithm in BASELINES and p is None:
        raise UsageError(f"--algorithm {algorithm} needs --p")
    return PcaConfig(k=args.k, s=args.oversample, q=q if algorithm in FAST else None,
                     p=p if algorithm in BASELINES else None, seed=args.seed,
                     deterministic=args.deterministic)


# -- run ----------------------------------------------------------------------

def cmd_run(args) -> int:
    A = load_matrix_market(args.input)
    cfg = _config(args, args.algorithm)
    if args.algorithm != "eigsvds":
        cfg.check(A.shape, needs="q" if args.algorithm in FAST else "p")
    prefix = Path(args.out_prefix) if args.out_prefix else Path(args.input).with_suffix("")

    tracemalloc.start()
    try:
        t0 = time.perf_counter()
        kw = {"gram_limit": args.gram_limit} if args.algorithm == "eigsvds" else {}
        res = run_algorithm(args.algorithm, A, cfg, **kw)
        total = time.perf_counter() - t0
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()

    outputs = {"S": f"{prefix}.S.csv"}
    write_csv(outputs["S"], ["index", "singular_value"],
              ((i + 1, float(s)) for i, s in enumerate(res.S)))
    if args.save_vectors:
        outputs["U"] = f"{prefix}.U.csv"
        outputs["V"] = f"{prefix}.V.csv"
        write_matrix_csv(outputs["U"], res.U, "u")
        write_matrix_csv(outputs["V"], res.V, "v")
    if args.compare_oracle:
        report = accuracy_report(A, res)
        outputs["accuracy"] = f"{prefix}.accuracy.json"
        outputs["correlation"] = f"{prefix}.corr.csv"
        Path(outputs["accuracy"]).write_text(report.to_json() + "\n")
        write_csv(outputs["correlation"], ["component", "abs_correlation"],
                  ((i + 1, float(c)) for i, c in enumerate(report.pc_correlations)))

    manifest = {
        "input": str(args.input),
        "shape": list(A.shape),
        "nnz": A.nnz,
        "algorithm": args.algorithm,
        "resolved_algorithm": res.info.get("path", res.info["algorithm"]),
        "k": cfg.k,
        "s": cfg.s,
        "q": cfg.q,
        "p": cfg.p,
        "seed": cfg.seed,
        "deterministic": cfg.deterministic,
        "timings_seconds": {
            "sketch": res.info["timings"].get("sketch", 0.0),
            "power_iterations": res.info["timings"].get("power_iterations", 0.0),
            "finalization": res.info["timings"].get("finalize", 0.0),
            "total": total,
        },
        "passes": res.info["passes"],
        "peak_memory_estimate": {"bytes": peak, "method": "tracemalloc allocation tracking"},
        "outputs": outputs,
    }
    outputs["manifest"] = f"{prefix}.manifest.json"
    Path(outputs["manifest"]).write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"{manifest['resolved_algorithm']}: k={cfg.k} passes={res.info['passes']} "
          f"time={total:.3f}s -> {outputs['S']}")
    return EXIT_OK


# -- gen / sparsify -------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.rows < 1 or args.cols < 1:
        raise UsageError("--rows and --cols must be positive")
    if args.nnz_per_row <= 0 or args.nnz_per_row > args.cols:
        raise UsageError(f"--nnz-per-row must be in (0, {args.cols}]")
    if args.spectrum is None:
        if args.nnz_per_row != int(args.nnz_per_row):
            raise UsageError("--nnz-per-row must be an integer without --spectrum")
        A = random_sparse(args.rows, args.cols, int(args.nnz_per_row), args.seed)
    else:
        try:
            sv = parse_spectrum(args.spectrum, min(args.rows, args.cols))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        A = spectral_sparse(args.rows, args.cols, args.nnz_per_row, sv, args.seed)
    write_matrix_market(args.out, A, comment=f"frpca gen seed={args.seed} spectrum={args.spectrum}")
    print(f"wrote {args.out}: {A.n_rows} x {A.n_cols}, nnz={A.nnz} ({A.nnz / A.n_rows:.2f} per row)")
    return EXIT_OK


def cmd_sparsify(args) -> int:
    if not 0.0 < args.keep <= 1.0:
        raise UsageError("--keep must lie in (0, 1]")
    A = load_matrix_market(args.input)
    B = sparsify(A, args.keep, args.seed)
    write_matrix_market(args.out, B, comment=f"frpca sparsify keep={args.keep} seed={args.seed}")
    print(f"nnz per row: {A.nnz / A.n_rows:.2f} -> {B.nnz / B.n_rows:.2f}")
    return EXIT_OK


# -- bench ---------------------------------------------------------------------

def _int_list(text: str | None) -> list[int] | None:
    if text is None:
        return None
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated integer list, got {text!r}") from None


def _reference_values(A, k: int, mode: str):
    m, n = A.shape
    if mode == "none":
        return None, "none"
    if mode in ("auto", "oracle") and m * n <= ORACLE_LIMIT:
        return oracle_svd(A)[1][:k], "oracle"
    if mode == "oracle":
        raise MemoryGuardError(f"oracle guard: {m} x {n} exceeds {ORACLE_LIMIT} dense entries")
    tall = A if m >= n else A.transpose()
    if mode == "eigsvds" or min(m, n) <= GRAM_LIMIT:
        return eig_svds(tall, k).S, "eigsvds"
    return None, "none"


def bench_grid(q_list, p_list) -> list[tuple[int | None, int | None]]:
    """Pairs ``(q, p)``: a q sweep runs baselines at ``p = (q - 1) // 2``."""
    if q_list and p_list:
        if len(q_list) != len(p_list):
            raise UsageError("--q-list and --p-list must have equal length")
        return list(zip(q_list, p_list))
    if q_list:
        return [(q, (q - 1) // 2) for q in q_list]
    if p_list:
        return [(2 * p + 2, p) for p in p_list]
    raise UsageError("give --q-list and/or --p-list")


def cmd_bench(args) -> int:
    A = load_matrix_market(args.input)
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    bad = [a for a in algorithms if a not in FAST + BASELINES + ("eigsvds",)]
    if not algorithms or bad:
        raise UsageError(f"unknown algorithms: {bad}")
    if args.repeats < 1 or args.warmup < 0:
        raise UsageError("--repeats must be >= 1 and --warmup >= 0")
    grid = bench_grid(_int_list(args.q_list), _int_list(args.p_list))
    ref, ref_name = _reference_values(A, args.k, args.reference)

    header = ["algorithm", "q", "p", "time_median_s", "passes", "sv_max_rel_err", "reference",
              "speedup_vs_first"]
    rows = []
    for q, p in grid:
        base_time = None
        for name in algorithms:
            cfg = PcaConfig(k=args.k, s=args.oversample, q=q if name in FAST else None,
                            p=p if name in BASELINES else None, seed=args.seed,
                            deterministic=args.deterministic)
            times, res = [], None
            # untimed runs absorb JIT compilation and first-touch costs
            for _ in range(args.warmup if (q, p) == grid[0] else 0):
                run_algorithm(name, A, cfg)
            for rep in range(args.repeats):
                t0 = time.perf_counter()
                res = run_algorithm(name, A, cfg)
                times.append(time.perf_counter() - t0)
            med = statistics.median(times)
            if base_time is None:
                base_time = med
            err = float(np.max(np.abs(res.S - ref) / ref)) if ref is not None else float("nan")
            rows.append([name, q if name in FAST else "", p if name in BASELINES else "", med,
                         res.info["passes"], err, ref_name, base_time / med])
    if args.out:
        write_csv(args.out, header, rows)
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(r if isinstance(r, str) else _fmt(r) if isinstance(r, float) else str(r)
                           for r in row))
    return EXIT_OK


# -- model ---------------------------------------------------------------------

def cmd_model(args) -> int:
    if (args.nnz is None) == (args.t is None):
        raise UsageError("give exactly one of --nnz or --t")
    nnz = args.nnz if args.nnz is not None else int(round(args.t * max(args.m, args.n)))
    if args.q is None and args.p is None:
        raise UsageError("give --q or --p")
    try:
        x = fm.CostInputs(args.m, args.n, nnz, args.k, args.s, q=args.q, p=args.p)
        c = fm.CostConstants(args.c_mul, args.c_qr, args.c_lu, args.c_svd, args.c_eig)
        report = fm.model_report(x, c)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "json":
        print(json.dumps(report, indent=2))
    else:
        print("quantity,value")
        for name, v in report["flops"].items():
            print(f"flops_{name},{'' if v is None else _fmt(float(v))}")
        for key in ("alpha", "beta", "sp1_full", "sp1_large_q", "sp1_limit", "sp1_flop_ratio"):
            print(f"{key},{_fmt(float(report[key]))}")
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="frpca", description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=None,
                    help="worker cap for kernels and BLAS (fallback: FRPCA_THREADS)")
    sub = ap.add_subparsers(dest="command", required=True)

    def algo_opts(p):
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--oversample", type=int, default=5)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--deterministic", action="store_true")

    r = sub.add_parser("run", help="compute a truncated SVD of a .mtx file")
    r.add_argument("input")
    r.add_argument("--algorithm", default="auto",
                   choices=["frpca", "frpcat", "auto", "basic", "basict", "eigsvds"])
    algo_opts(r)
    r.add_argument("--q", type=int)
    r.add_argument("--p", type=int)
    r.add_argument("--out-prefix")
    r.add_argument("--save-vectors", action="store_true")
    r.add_argument("--compare-oracle", action="store_true",
                   help="also write accuracy JSON and PC correlations against the dense oracle")
    r.add_argument("--gram-limit", type=int, default=GRAM_LIMIT)
    r.set_defaults(func=cmd_run)

    g = sub.add_parser("gen", help="write a synthetic sparse matrix")
    g.add_argument("--rows", type=int, required=True)
    g.add_argument("--cols", type=int, required=True)
    g.add_argument("--nnz-per-row", type=float, required=True)
    g.add_argument("--spectrum", help="geometric:RATIO | flat | file:PATH")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("sparsify", help="randomly drop stored entries")
    s.add_argument("input")
    s.add_argument("--keep", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sparsify)

    b = sub.add_parser("bench", help="time algorithms over a q/p sweep")
    b.add_argument("input")
    b.add_argument("--algorithms", default="basic,auto")
    b.add_argument("--q-list")
    b.add_argument("--p-list")
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--warmup", type=int, default=1, help="untimed runs per algorithm before timing")
    b.add_argument("--reference", choices=["auto", "oracle", "eigsvds", "none"], default="auto")
    b.add_argument("--out")
    algo_opts(b)
    b.set_defaults(func=cmd_bench)

    m = sub.add_parser("model", help="flop-count predictions")
    m.add_argument("--m", type=int, required=True)
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--nnz", type=int)
    m.add_argument("--t", type=float, help="average nonzeros per row of the tall orientation")
    m.add_argument("--k", type=int, required=True)
    m.add_argument("--s", type=int, default=5)
    m.add_argument("--q", type=float)
    m.add_argument("--p", type=float)
    for name, default in (("c-mul", 1.0), ("c-qr", 5.0), ("c-lu", 1.0), ("c-svd", 25.0), ("c-eig", 25.0)):
        m.add_argument(f"--{name}", type=float, default=default)
    m.add_argument("--format", choices=["json", "csv"], default="json")
    m.set_defaults(func=cmd_model)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        set_threads(args.threads)
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"frpca: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERIC_ERRORS as exc:
        print(f"frpca: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, MatrixMarketError) as exc:
        print(f"frpca: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"frpca: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
