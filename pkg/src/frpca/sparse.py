"""CSR storage and the two sparse-times-dense kernels used by every algorithm.

``A @ X`` is row-partitioned; ``A.T @ Y`` is a scatter over the rows of ``A``
so the transpose is never materialised. Both kernels bump the active pass
counters (see :func:`count_passes`), which is how the algorithms report the
number of traversals of ``A``.
"""
from __future__ import annotations

import contextlib
import contextvars
import os
from dataclasses import dataclass, field
from typing import Iterator

import numba
import numpy as np

from .errors import DimensionMismatchError

if "NUMBA_THREADING_LAYER" not in os.environ:
    # skip the TBB probe, which warns on older TBB installs
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

__all__ = [
    "SparseMatrixCSR",
    "SparsityStats",
    "PassCounter",
    "count_passes",
    "spmm",
    "spmm_transpose",
    "sparsify",
    "nnz_stats",
]


@dataclass(frozen=True, eq=False)
class SparseMatrixCSR:
    """Immutable row-compressed sparse matrix.

    Build through :meth:`from_coo`, :meth:`from_dense` or :meth:`from_scipy`;
    the plain constructor validates but does not canonicalise.
    """

    n_rows: int
    n_cols: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        row_ptr = np.ascontiguousarray(self.row_ptr, dtype=np.int64)
        col_idx = np.ascontiguousarray(self.col_idx, dtype=np.int64)
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        for arr in (row_ptr, col_idx, values):
            arr.setflags(write=False)
        object.__setattr__(self, "row_ptr", row_ptr)
        object.__setattr__(self, "col_idx", col_idx)
        object.__setattr__(self, "values", values)
        self.check()

    def check(self) -> None:
        """Raise ``ValueError`` if any CSR invariant is violated."""
        m, n = self.n_rows, self.n_cols
        if m < 0 or n < 0:
            raise ValueError("negative dimension")
        rp, ci, v = self.row_ptr, self.col_idx, self.values
        if rp.shape != (m + 1,):
            raise ValueError(f"row_ptr must have length {m + 1}, got {rp.shape}")
        if rp[0] != 0 or rp[-1] != len(ci) or len(ci) != len(v):
            raise ValueError("row_ptr endpoints inconsistent with nnz")
        if np.any(np.diff(rp) < 0):
            raise ValueError("row_ptr must be non-decreasing")
        if len(ci):
            if ci.min() < 0 or ci.max() >= n:
                raise ValueError("column index out of range")
            # strictly increasing inside a row: a non-increase is allowed only at row starts
            bad = np.diff(ci) <= 0
            starts = np.zeros(len(ci) - 1, dtype=bool)
            inner = rp[1:-1]
            inner = inner[(inner > 0) & (inner < len(ci))]
            starts[inner - 1] = True
            if np.any(bad & ~starts):
                raise ValueError("column indices must be strictly increasing within a row")
        if np.any(v == 0.0):
            raise ValueError("explicit zeros are not allowed")

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_coo(cls, rows, cols, vals, shape: tuple[int, int]) -> "SparseMatrixCSR":
        """Canonical CSR from coordinate triplets; duplicates are summed, zeros dropped."""
        m, n = int(shape[0]), int(shape[1])
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=np.float64).ravel()
        if not (len(rows) == len(cols) == len(vals)):
            raise ValueError("coordinate arrays differ in length")
        if len(rows) and (rows.min() < 0 or rows.max() >= m or cols.min() < 0 or cols.max() >= n):
            raise ValueError("coordinate out of bounds")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if len(rows):
            new = np.ones(len(rows), dtype=bool)
            new[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            group = np.cumsum(new) - 1
            vals = np.bincount(group, weights=vals)
            rows, cols = rows[new], cols[new]
            keep = vals != 0.0
            rows, cols, vals = rows[keep], cols[keep], vals[keep]
        row_ptr = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=m), out=row_ptr[1:])
        return cls(m, n, row_ptr, cols, vals)

    @classmethod
    def from_dense(cls, M) -> "SparseMatrixCSR":
        M = np.asarray(M, dtype=np.float64)
        if M.ndim != 2:
            raise ValueError("expected a 2-D array")
        r, c = np.nonzero(M)
        return cls.from_coo(r, c, M[r, c], M.shape)

    @classmethod
    def from_scipy(cls, S) -> "SparseMatrixCSR":
        coo = S.tocoo()
        return cls.from_coo(coo.row, coo.col, coo.data, coo.shape)

    # -- views --------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    @property
    def nnz(self) -> int:
        return int(self.row_ptr[-1])

    def row_indices(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_rows, dtype=np.int64), np.diff(self.row_ptr))

    def toarray(self) -> np.ndarray:
        out = np.zeros(self.shape)
        out[self.row_indices(), self.col_idx] = self.values
        return out

    def to_scipy(self):
        import scipy.sparse as sp

        return sp.csr_matrix((self.values, self.col_idx, self.row_ptr), shape=self.shape)

    def transpose(self) -> "SparseMatrixCSR":
        """Explicit transpose. Allocates; the algorithms never call it."""
        return SparseMatrixCSR.from_coo(self.col_idx, self.row_indices(), self.values,
                                        (self.n_cols, self.n_rows))

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def __repr__(self) -> str:
        return f"SparseMatrixCSR(shape={self.shape}, nnz={self.nnz})"


# -- pass accounting ----------------------------------------------------------

@dataclass
class PassCounter:
    passes: int = 0
    by_kernel: dict = field(default_factory=lambda: {"spmm": 0, "spmm_transpose": 0})


_active_counters: contextvars.ContextVar[tuple] = contextvars.ContextVar("_active_counters", default=())


@contextlib.contextmanager
def count_passes() -> Iterator[PassCounter]:
    """Count sparse passes made by kernels invoked inside the ``with`` block.

    Counters nest; every active counter sees every pass.
    """
    counter = PassCounter()
    token = _active_counters.set(_active_counters.get() + (counter,))
    try:
        yield counter
    finally:
        _active_counters.reset(token)


def record_pass(kernel: str) -> None:
    for c in _active_counters.get():
        c.passes += 1
        c.by_kernel[kernel] = c.by_kernel.get(kernel, 0) + 1


# -- kernels ------------------------------------------------------------------

@numba.njit(parallel=True, cache=True)
def _spmm_rows(row_ptr, col_idx, values, X, out):
    m = row_ptr.shape[0] - 1
    l = X.shape[1]
    for i in numba.prange(m):
        for jj in range(row_ptr[i], row_ptr[i + 1]):
            v = values[jj]
            j = col_idx[jj]
            for c in range(l):
                out[i, c] += v * X[j, c]


@numba.njit(cache=True)
def _spmm_t_scatter(row_ptr, col_idx, values, Y, out, r0, r1):
    l = Y.shape[1]
    for i in range(r0, r1):
        for jj in range(row_ptr[i], row_ptr[i + 1]):
            v = values[jj]
            j = col_idx[jj]
            for c in range(l):
                out[j, c] += v * Y[i, c]


@numba.njit(parallel=True, cache=True)
def _spmm_t_chunked(row_ptr, col_idx, values, Y, bufs, bounds):
    nchunks = bufs.shape[0]
    for t in numba.prange(nchunks):
        _spmm_t_scatter(row_ptr, col_idx, values, Y, bufs[t], bounds[t], bounds[t + 1])


def _as_dense(X, name: str) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D")
    return np.ascontiguousarray(X)


def spmm(A: SparseMatrixCSR, X, *, deterministic: bool = False) -> np.ndarray:
    """Return ``A @ X`` for dense ``X`` (n x l).

    Rows are independent, so the result is bit-reproducible in either mode;
    the flag is accepted for symmetry with :func:`spmm_transpose`.
    """
    X = _as_dense(X, "X")
    if X.shape[0] != A.n_cols:
        raise DimensionMismatchError(f"A is {A.shape}, X has {X.shape[0]} rows")
    out = np.zeros((A.n_rows, X.shape[1]))
    if A.nnz and X.shape[1]:
        _spmm_rows(A.row_ptr, A.col_idx, A.values, X, out)
    record_pass("spmm")
    return out


def spmm_transpose(A: SparseMatrixCSR, Y, *, deterministic: bool = False) -> np.ndarray:
    """Return ``A.T @ Y`` for dense ``Y`` (m x l) without forming ``A.T``.

    In parallel mode each worker scatters a contiguous block of rows into
    its own buffer and the buffers are summed in block order, so the
    summation order depends on the worker count.
    """
    Y = _as_dense(Y, "Y")
    if Y.shape[0] != A.n_rows:
        raise DimensionMismatchError(f"A is {A.shape}, Y has {Y.shape[0]} rows")
    l = Y.shape[1]
    nthreads = numba.get_num_threads()
    if deterministic or nthreads == 1 or A.nnz < 10_000:
        out = np.zeros((A.n_cols, l))
        if A.nnz and l:
            _spmm_t_scatter(A.row_ptr, A.col_idx, A.values, Y, out, 0, A.n_rows)
    else:
        # split rows so each chunk carries roughly the same number of nonzeros
        targets = np.linspace(0, A.nnz, nthreads + 1)
        bounds = np.searchsorted(A.row_ptr, targets).astype(np.int64)
        bounds[0], bounds[-1] = 0, A.n_rows
        bufs = np.zeros((nthreads, A.n_cols, l))
        _spmm_t_chunked(A.row_ptr, A.col_idx, A.values, Y, bufs, bounds)
        out = bufs.sum(axis=0)
    record_pass("spmm_transpose")
    return out


# -- dataset utilities --------------------------------------------------------

@dataclass(frozen=True)
class SparsityStats:
    nnz: int
    t: float
    alpha: float
    beta: float


def nnz_stats(A: SparseMatrixCSR, l: int) -> SparsityStats:
    """Average nonzeros per row ``t``, ``alpha = t / l`` and ``beta = n / m``."""
    if l < 1:
        raise ValueError("sketch width l must be >= 1")
    t = A.nnz / A.n_rows
    return SparsityStats(nnz=A.nnz, t=t, alpha=t / l, beta=A.n_cols / A.n_rows)


def sparsify(A: SparseMatrixCSR, keep_fraction: float, seed: int | None = None) -> SparseMatrixCSR:
    """Drop each stored entry independently, keeping it with probability ``keep_fraction``."""
    if not 0.0 < keep_fraction <= 1.0:
        raise ValueError(f"keep_fraction must lie in (0, 1], got {keep_fraction}")
    if keep_fraction == 1.0:
        return A
    rng = np.random.default_rng(seed)
    keep = rng.random(A.nnz) < keep_fraction
    counts = np.bincount(A.row_indices()[keep], minlength=A.n_rows)
    row_ptr = np.zeros(A.n_rows + 1, dtype=np.int64)
    np.cumsum(counts, out=row_ptr[1:])
    return SparseMatrixCSR(A.n_rows, A.n_cols, row_ptr, A.col_idx[keep], A.values[keep])
