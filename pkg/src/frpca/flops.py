"""Analytic flop counts and predicted speedups of the fast algorithms.

Every count is expressed through five per-class constants: sparse-times-dense
products cost ``c_mul * nnz * l``, QR and economic SVD of an ``a x b`` block
cost ``c_qr * a*b*min(a,b)`` and ``c_svd * a*b*min(a,b)``, an ``a x l`` LU
costs ``c_lu * (a l^2 - l^3/2)`` and a dense ``l x l`` eigensolve ``c_eig l^3``.

The fast-algorithm counts use the approximate forms (LU priced like a dense
product, the ``l^3`` terms dropped). Odd ``q`` is evaluated with the same
expressions, i.e. with the fractional multiplier ``q/2 - 1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

ALGORITHMS = ("basic_rpca", "eigsvd", "basic_rpcat", "frpca", "frpcat")


@dataclass(frozen=True)
class CostConstants:
    c_mul: float = 1.0
    c_qr: float = 5.0
    c_lu: float = 1.0
    c_svd: float = 25.0
    c_eig: float = 25.0

    def __post_init__(self):
        for name in ("c_mul", "c_qr", "c_lu", "c_svd", "c_eig"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class CostInputs:
    """Problem size. Give ``q`` or ``p``; the other follows from ``q = 2p + 2``."""

    m: int
    n: int
    nnz: int
    k: int
    s: int = 5
    q: float | None = None
    p: float | None = None

    def __post_init__(self):
        if self.m < 1 or self.n < 1 or self.nnz < 0 or self.k < 0 or self.s < 0:
            raise ValueError("sizes must be non-negative (m, n positive)")
        if self.l > min(self.m, self.n):
            raise ValueError(f"l = {self.l} exceeds min(m, n)")
        if self.nnz > self.m * self.n:
            raise ValueError("nnz exceeds m * n")

    @property
    def l(self) -> int:
        return self.k + self.s

    @property
    def passes(self) -> float:
        if self.q is not None:
            return self.q
        if self.p is not None:
            return 2 * self.p + 2
        raise ValueError("either q or p is required")

    @property
    def power(self) -> float:
        if self.p is not None:
            return self.p
        return (self.passes - 2) / 2


def flops(algorithm: str, x: CostInputs, c: CostConstants = CostConstants()) -> float:
    m, n, nnz, k, l = x.m, x.n, x.nnz, x.k, x.l
    if algorithm == "basic_rpca":
        p = x.power
        return (p * c.c_qr * n * l**2 + (p + 1) * c.c_qr * m * l**2
                + (2 * p + 2) * c.c_mul * nnz * l + c.c_mul * m * l * k + c.c_svd * n * l**2)
    if algorithm == "basic_rpcat":
        p = x.power
        return (p * c.c_qr * m * l**2 + (p + 1) * c.c_qr * n * l**2
                + (2 * p + 2) * c.c_mul * nnz * l + c.c_mul * n * l * k + c.c_svd * m * l**2)
    if algorithm == "eigsvd":
        if m < n:
            raise ValueError("the Gram-matrix SVD needs m >= n")
        return 2 * c.c_mul * m * n**2 + c.c_eig * n**3
    q = x.passes
    if q < 2:
        raise ValueError(f"fast algorithms need q >= 2, got {q}")
    if algorithm == "frpca":
        return ((q / 2 - 1) * c.c_mul * m * l**2 + q * c.c_mul * nnz * l
                + c.c_mul * m * l * k + 2 * c.c_mul * (m + n) * l**2)
    if algorithm == "frpcat":
        return ((q / 2 - 1) * c.c_mul * n * l**2 + q * c.c_mul * nnz * l
                + c.c_mul * n * l * k + 2 * c.c_mul * (m + n) * l**2)
    raise ValueError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")


def flops_exact_fast(algorithm: str, x: CostInputs, c: CostConstants = CostConstants()) -> float:
    """Fast-algorithm counts before the LU/eigensolver simplification."""
    q, nnz, k, l, m, n = x.passes, x.nnz, x.k, x.l, x.m, x.n
    a = m if algorithm == "frpca" else n
    if algorithm not in ("frpca", "frpcat"):
        raise ValueError("only frpca/frpcat have an exact form")
    return ((q / 2 - 1) * c.c_lu * (a * l**2 - l**3 / 2) + q * c.c_mul * nnz * l
            + c.c_mul * a * l * k + 2 * c.c_mul * (m + n) * l**2 + 2 * c.c_eig * l**3)


def _check_params(alpha: float, beta: float) -> None:
    if not alpha >= 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")


def speedup_sp1(alpha: float, beta: float, q: float, c: CostConstants = CostConstants()) -> float:
    """Predicted basic_rpca / frpcat time ratio in terms of ``alpha = t/l`` and ``beta = n/m``."""
    _check_params(alpha, beta)
    if beta > 1:
        raise ValueError("beta must be <= 1 (tall matrix)")
    if q < 2:
        raise ValueError("q must be >= 2")
    num = ((q / 2 - 1) * c.c_qr * beta + (q / 2) * c.c_qr + q * c.c_mul * alpha
           + c.c_mul + c.c_svd * beta)
    den = (q / 2 + 1) * c.c_mul * beta + q * c.c_mul * alpha + c.c_mul * beta + 2 * c.c_mul
    return num / den


def speedup_sp1_large_q(alpha: float, beta: float, q: float, c: CostConstants = CostConstants()) -> float:
    """:func:`speedup_sp1` keeping only the terms that grow with ``q``."""
    _check_params(alpha, beta)
    num = (q / 2 - 1) * c.c_qr * beta + (q / 2) * c.c_qr + q * c.c_mul * alpha
    den = (q / 2 + 1) * c.c_mul * beta + q * c.c_mul * alpha
    return num / den


def sp1_limit(alpha: float, beta: float, c: CostConstants = CostConstants()) -> float:
    """``q -> infinity`` limit of the predicted speedup; ``2 c_qr / c_mul`` at alpha=0, beta=1."""
    _check_params(alpha, beta)
    return (c.c_qr * beta + c.c_qr + 2 * c.c_mul * alpha) / (c.c_mul * beta + 2 * c.c_mul * alpha)


def sp1_monotonicity_check(alpha_grid: Sequence[float], beta: float, q: float,
                           c: CostConstants = CostConstants()) -> bool:
    """True iff the predicted speedup strictly decreases along an ascending ``alpha_grid``."""
    grid = list(alpha_grid)
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("alpha_grid must be strictly ascending")
    vals = [speedup_sp1(a, beta, q, c) for a in grid]
    return all(b < a for a, b in zip(vals, vals[1:]))


def shape_params(m: int, n: int, nnz: int, l: int) -> tuple[float, float]:
    """``(alpha, beta)`` for a tall matrix (roles swapped when ``m < n``)."""
    if m < n:
        m, n = n, m
    t = nnz / m
    return t / l, n / m


def model_report(x: CostInputs, c: CostConstants = CostConstants()) -> dict:
    """Everything the ``model`` command prints."""
    alpha, beta = shape_params(x.m, x.n, x.nnz, x.l)
    q = x.passes
    fc = {}
    for name in ALGORITHMS:
        try:
            fc[name] = flops(name, x, c)
        except ValueError:
            fc[name] = None
    return {
        "inputs": {"m": x.m, "n": x.n, "nnz": x.nnz, "k": x.k, "s": x.s, "l": x.l, "q": q,
                   "p": x.power},
        "constants": {"c_mul": c.c_mul, "c_qr": c.c_qr, "c_lu": c.c_lu, "c_svd": c.c_svd,
                      "c_eig": c.c_eig},
        "alpha": alpha,
        "beta": beta,
        "flops": fc,
        "sp1_full": speedup_sp1(alpha, beta, q, c),
        "sp1_large_q": speedup_sp1_large_q(alpha, beta, q, c),
        "sp1_limit": sp1_limit(alpha, beta, c),
        "sp1_flop_ratio": (fc["basic_rpca"] / fc["frpcat"]) if x.m >= x.n else
                          (fc["basic_rpcat"] / fc["frpca"]),
    }
