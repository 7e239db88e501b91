"""Synthetic sparse test matrices.

``random_sparse`` places a fixed number of Gaussian entries in every row.
``spectral_sparse`` starts from a rectangular diagonal holding the requested
singular values and mixes it with rounds of disjoint random Givens rotations
on rows and columns; rotations are orthogonal, so the singular values are
exact up to rounding while the fill grows until the target density is
reached.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .sparse import SparseMatrixCSR


def random_sparse(m: int, n: int, nnz_per_row: int, seed=None) -> SparseMatrixCSR:
    """``nnz_per_row`` distinct uniformly placed N(0, 1) entries in each row."""
    if not 1 <= nnz_per_row <= n:
        raise ValueError(f"nnz_per_row must be in [1, {n}], got {nnz_per_row}")
    rng = np.random.default_rng(seed)
    t = nnz_per_row
    if t > n // 4:
        cols = rng.permuted(np.tile(np.arange(n), (m, 1)), axis=1)[:, :t]
    else:
        cols = rng.integers(0, n, size=(m, t))
        while True:
            cols.sort(axis=1)
            dup = np.any(cols[:, 1:] == cols[:, :-1], axis=1)
            if not dup.any():
                break
            cols[dup] = rng.integers(0, n, size=(int(dup.sum()), t))
    rows = np.repeat(np.arange(m), t)
    return SparseMatrixCSR.from_coo(rows, cols.ravel(), rng.standard_normal(m * t), (m, n))


def parse_spectrum(text: str, count: int) -> np.ndarray:
    """``geometric:RATIO``, ``flat`` or ``file:PATH`` -> ``count`` singular values."""
    if text == "flat":
        return np.ones(count)
    kind, _, arg = text.partition(":")
    if kind == "geometric":
        ratio = float(arg)
        if not 0 < ratio <= 1:
            raise ValueError(f"geometric ratio must be in (0, 1], got {ratio}")
        return ratio ** np.arange(count, dtype=np.float64)
    if kind == "file":
        vals = np.loadtxt(Path(arg), ndmin=1, dtype=np.float64)
        if np.any(vals < 0):
            raise ValueError("singular values must be non-negative")
        out = np.zeros(count)
        out[: min(count, len(vals))] = np.sort(vals)[::-1][:count]
        return out
    raise ValueError(f"unknown spectrum {text!r}")


def _givens_round(size: int, frac: float, rng) -> sp.csr_matrix:
    perm = rng.permutation(size)
    npairs = max(1, int(round(frac * (size // 2))))
    i, j = perm[0:2 * npairs:2], perm[1:2 * npairs:2]
    theta = rng.uniform(0, 2 * np.pi, npairs)
    c, s = np.cos(theta), np.sin(theta)
    fixed = np.setdiff1d(np.arange(size), np.concatenate([i, j]))
    rows = np.concatenate([i, i, j, j, fixed])
    cols = np.concatenate([i, j, i, j, fixed])
    vals = np.concatenate([c, -s, s, c, np.ones(len(fixed))])
    return sp.csr_matrix((vals, (rows, cols)), shape=(size, size))


def spectral_sparse(m: int, n: int, nnz_per_row: float, singular_values, seed=None,
                    max_rounds: int = 64) -> SparseMatrixCSR:
    """Sparse ``m x n`` matrix with exactly the given singular values.

    The density lands near ``nnz_per_row`` (at or a little above it unless
    the matrix saturates).
    """
    if nnz_per_row < 1:
        raise ValueError("nnz_per_row must be >= 1")
    r = min(m, n)
    sv = np.asarray(singular_values, dtype=np.float64)
    if sv.shape != (r,):
        raise ValueError(f"need {r} singular values, got {sv.shape}")
    rng = np.random.default_rng(seed)
    A = sp.csr_matrix((sv, (rng.permutation(m)[:r], rng.permutation(n)[:r])), shape=(m, n))
    A.eliminate_zeros()
    target = min(nnz_per_row, n)
    for step in range(max_rounds):
        d = A.nnz / m
        if d >= target:
            break
        # a full round roughly doubles the fill; rotate only the fraction needed
        frac = min(1.0, target / max(d, 1e-12) - 1.0)
        if step % 2 == 0:
            A = _givens_round(m, frac, rng) @ A
        else:
            A = A @ _givens_round(n, frac, rng).T
        A.eliminate_zeros()
    return SparseMatrixCSR.from_scipy(A)
