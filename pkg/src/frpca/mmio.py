"""Matrix Market coordinate I/O (real/integer, general/symmetric)."""
from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .errors import MatrixMarketError
from .sparse import SparseMatrixCSR

_MAX_DIM = np.iinfo(np.int64).max // 2


def _parse_header(line: str) -> str:
    parts = line.strip().split()
    if len(parts) != 5 or parts[0].lower() != "%%matrixmarket":
        raise MatrixMarketError(f"bad banner line: {line.strip()!r}")
    obj, fmt, field, symmetry = (p.lower() for p in parts[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise MatrixMarketError(f"only 'matrix coordinate' is supported, got {obj} {fmt}")
    if field not in ("real", "integer", "double"):
        raise MatrixMarketError(f"unsupported field {field!r}")
    if symmetry not in ("general", "symmetric"):
        raise MatrixMarketError(f"unsupported symmetry {symmetry!r}")
    return symmetry


def load_matrix_market(path) -> SparseMatrixCSR:
    """Read a coordinate ``.mtx`` file into canonical CSR.

    Duplicate coordinates are summed. Symmetric files are expanded to full
    storage.
    """
    with open(path, "r") as fh:
        symmetry = _parse_header(fh.readline())
        line = fh.readline()
        while line and (line.startswith("%") or not line.strip()):
            line = fh.readline()
        try:
            m, n, nnz = (int(x) for x in line.split())
        except ValueError:
            raise MatrixMarketError(f"bad size line: {line.strip()!r}") from None
        if min(m, n, nnz) < 0 or max(m, n) > _MAX_DIM or m * n > _MAX_DIM * 2:
            raise MatrixMarketError(f"dimension overflow: {m} x {n}")
        body = fh.read()

    if nnz:
        try:
            data = np.loadtxt(io.StringIO(body), comments="%", ndmin=2)
        except ValueError as exc:
            raise MatrixMarketError(f"malformed entry: {exc}") from None
    else:
        data = np.zeros((0, 3))
    if data.shape != (nnz, 3):
        raise MatrixMarketError(f"expected {nnz} entries of 3 fields, got array {data.shape}")
    rows = data[:, 0].astype(np.int64) - 1
    cols = data[:, 1].astype(np.int64) - 1
    if np.any(data[:, :2] != np.floor(data[:, :2])):
        raise MatrixMarketError("non-integer coordinate")
    if nnz and (rows.min() < 0 or rows.max() >= m or cols.min() < 0 or cols.max() >= n):
        raise MatrixMarketError("coordinate out of bounds")
    vals = data[:, 2]
    if symmetry == "symmetric":
        if m != n:
            raise MatrixMarketError("symmetric matrix must be square")
        off = rows != cols
        rows, cols, vals = (np.concatenate([rows, cols[off]]),
                            np.concatenate([cols, rows[off]]),
                            np.concatenate([vals, vals[off]]))
    return SparseMatrixCSR.from_coo(rows, cols, vals, (m, n))


def write_matrix_market(path, A: SparseMatrixCSR, comment: str | None = None) -> None:
    """Write ``A`` as a general real coordinate file with 17 significant digits."""
    rows = A.row_indices() + 1
    cols = A.col_idx + 1
    with open(Path(path), "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        if comment:
            for line in comment.splitlines():
                fh.write(f"% {line}\n")
        fh.write(f"{A.n_rows} {A.n_cols} {A.nnz}\n")
        if A.nnz:
            np.savetxt(fh, np.column_stack([rows, cols, A.values]), fmt="%d %d %.17g")
