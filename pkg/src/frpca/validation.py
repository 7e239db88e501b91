"""Reference SVDs and accuracy metrics for checking the randomized algorithms."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numba
import numpy as np
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, DimensionMismatchError, MemoryGuardError
from .randsvd import SVDResult
from .sparse import SparseMatrixCSR, spmm, spmm_transpose

ORACLE_LIMIT = 4_000_000
DENSE_RESIDUAL_LIMIT = 250_000


def _dense(A) -> np.ndarray:
    if isinstance(A, SparseMatrixCSR):
        return A.toarray()
    return np.asarray(A, dtype=np.float64)


@numba.njit(cache=True)
def _hestenes(W, V, max_sweeps):
    # W holds the columns of the working matrix as rows (contiguous access)
    n = W.shape[0]
    eps = 2.220446049250313e-16
    for sweep in range(max_sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                a = np.dot(W[i], W[i])
                b = np.dot(W[j], W[j])
                g = np.dot(W[i], W[j])
                if g == 0.0 or abs(g) <= eps * np.sqrt(a * b):
                    continue
                rotated = True
                zeta = (b - a) / (2.0 * g)
                if zeta >= 0.0:
                    t = 1.0 / (zeta + np.sqrt(1.0 + zeta * zeta))
                else:
                    t = -1.0 / (-zeta + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                wi = W[i].copy()
                W[i] = c * wi - s * W[j]
                W[j] = s * wi + c * W[j]
                vi = V[i].copy()
                V[i] = c * vi - s * V[j]
                V[j] = s * vi + c * V[j]
        if not rotated:
            return sweep + 1
    return -1


def _jacobi_svd(M: np.ndarray):
    m, n = M.shape
    if m < n:
        U, S, V = _jacobi_svd(M.T)
        return V, S, U
    W = np.ascontiguousarray(M.T)
    Vt = np.eye(n)
    if _hestenes(W, Vt, 80) < 0:
        raise ConvergenceError("one-sided Jacobi did not converge")
    S = np.sqrt(np.einsum("ij,ij->i", W, W))
    order = np.argsort(-S, kind="stable")
    S, W, Vt = S[order], W[order], Vt[order]
    U = np.zeros((m, n))
    nz = S > 0
    U[:, nz] = (W[nz] / S[nz, None]).T
    return U, S, Vt.T


def oracle_svd(A, *, limit: int = ORACLE_LIMIT, method: str = "lapack"):
    """Thin SVD ``(U, S, V)`` of the densified matrix, values descending.

    ``method="lapack"`` uses ``numpy.linalg.svd``; ``method="jacobi"`` runs a
    one-sided (Hestenes) Jacobi SVD. Both are independent of the Gram-matrix
    route used by :func:`frpca.dense.eig_svd`. For zero singular values the
    Jacobi variant returns zero columns in ``U``.
    """
    m, n = A.shape
    if m * n > limit:
        raise MemoryGuardError(f"oracle guard: {m} x {n} exceeds {limit} dense entries")
    M = _dense(A)
    if method == "lapack":
        U, S, Vt = np.linalg.svd(M, full_matrices=False)
        return U, S, Vt.T
    if method == "jacobi":
        return _jacobi_svd(M)
    raise ValueError(f"unknown oracle method {method!r}")


def best_rank_k_error(A, k: int, norm: str = "spectral", *, singular_values=None,
                      limit: int = ORACLE_LIMIT) -> float:
    """``|A - A_k|`` from the oracle spectrum."""
    S = singular_values if singular_values is not None else oracle_svd(A, limit=limit)[1]
    tail = np.asarray(S)[k:]
    if norm == "spectral":
        return float(tail[0]) if tail.size else 0.0
    if norm == "frobenius":
        return float(np.sqrt(np.sum(tail**2)))
    raise ValueError(f"unknown norm {norm!r}")


def _residual_operator(A: SparseMatrixCSR, r: SVDResult):
    U, S, V = r.U, r.S, r.V

    def matvec(x):
        x = np.asarray(x).reshape(-1, 1)
        return (spmm(A, x) - U @ (S[:, None] * (V.T @ x))).ravel()

    def rmatvec(y):
        y = np.asarray(y).reshape(-1, 1)
        return (spmm_transpose(A, y) - V @ (S[:, None] * (U.T @ y))).ravel()

    return spla.LinearOperator(A.shape, matvec=matvec, rmatvec=rmatvec, dtype=np.float64)


def low_rank_error(A: SparseMatrixCSR, r: SVDResult, norm: str = "frobenius", *,
                   dense_limit: int = DENSE_RESIDUAL_LIMIT, seed: int = 0) -> float:
    """``|A - U diag(S) V.T|`` in the Frobenius or spectral norm.

    Small problems form the residual explicitly. Larger ones never densify
    ``A``: the Frobenius norm is expanded as
    ``|A|^2 - 2 tr(S U.T A V) + |U S V.T|^2`` and the spectral norm comes from
    Lanczos on the residual operator.
    """
    m, n = A.shape
    if r.U.shape[0] != m or r.V.shape[0] != n or r.U.shape[1] != len(r.S) or r.V.shape[1] != len(r.S):
        raise DimensionMismatchError("factor shapes do not match A")
    if m * n <= dense_limit or min(m, n) < 3:
        R = A.toarray() - r.reconstruct()
        if norm == "frobenius":
            return float(np.linalg.norm(R))
        if norm == "spectral":
            return float(np.linalg.norm(R, 2))
        raise ValueError(f"unknown norm {norm!r}")
    if norm == "frobenius":
        S = r.S
        cross = float(np.sum(S * np.einsum("ij,ij->j", r.U, spmm(A, r.V))))
        approx_sq = float(np.sum((r.U.T @ r.U) * (S[:, None] * (r.V.T @ r.V) * S[None, :])))
        return float(np.sqrt(max(A.frobenius_norm() ** 2 - 2 * cross + approx_sq, 0.0)))
    if norm == "spectral":
        v0 = np.random.default_rng(seed).standard_normal(min(m, n))
        sv = spla.svds(_residual_operator(A, r), k=1, tol=1e-13, v0=v0,
                       return_singular_vectors=False, maxiter=20 * min(m, n))
        return float(sv.max())
    raise ValueError(f"unknown norm {norm!r}")


def pc_correlation(U_test, U_ref) -> np.ndarray:
    """Per-column absolute Pearson correlation (sign invariant)."""
    X = np.asarray(U_test, dtype=np.float64)
    Y = np.asarray(U_ref, dtype=np.float64)
    if X.shape != Y.shape:
        raise DimensionMismatchError(f"shapes differ: {X.shape} vs {Y.shape}")
    X = X - X.mean(axis=0)
    Y = Y - Y.mean(axis=0)
    sx = np.linalg.norm(X, axis=0)
    sy = np.linalg.norm(Y, axis=0)
    if np.any(sx == 0) or np.any(sy == 0):
        raise ValueError("zero-variance column")
    return np.abs(np.einsum("ij,ij->j", X, Y)) / (sx * sy)


def projector_distance(Q1, Q2, *, tol: float = 1e-8) -> float:
    """``|Q1 Q1.T - Q2 Q2.T|_2`` for orthonormal ``m x l`` bases.

    Uses ``|(I - Q1 Q1.T) Q2|_2``, equal to the projector gap for bases of
    equal rank, so no ``m x m`` matrix is formed and small angles keep full
    absolute accuracy.
    """
    Q1 = np.asarray(Q1, dtype=np.float64)
    Q2 = np.asarray(Q2, dtype=np.float64)
    if Q1.shape != Q2.shape:
        raise DimensionMismatchError(f"shapes differ: {Q1.shape} vs {Q2.shape}")
    eye = np.eye(Q1.shape[1])
    for Q in (Q1, Q2):
        if np.abs(Q.T @ Q - eye).max() > tol:
            raise ValueError("projector_distance needs orthonormal columns")
    W = Q2 - Q1 @ (Q1.T @ Q2)
    return float(np.linalg.norm(W, 2))


@dataclass
class AccuracyReport:
    singular_value_rel_err: list
    recon_err_frobenius: float
    recon_err_spectral: float
    best_rank_k_err: float
    eps_equivalent: float
    pc_correlations: list
    best_rank_k_err_frobenius: float
    eps_equivalent_frobenius: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def _ratio_minus_one(num: float, den: float) -> float:
    if den == 0.0:
        return 0.0 if num == 0.0 else float("inf")
    return num / den - 1.0


def accuracy_report(A: SparseMatrixCSR, r: SVDResult, *, oracle=None,
                    limit: int = ORACLE_LIMIT) -> AccuracyReport:
    """Compare ``r`` with the oracle SVD of ``A`` (computed unless supplied)."""
    U0, S0, _ = oracle if oracle is not None else oracle_svd(A, limit=limit)
    k = r.k
    rel = np.abs(r.S - S0[:k]) / np.where(S0[:k] > 0, S0[:k], 1.0)
    fro = low_rank_error(A, r, "frobenius")
    spectral = low_rank_error(A, r, "spectral")
    best_s = best_rank_k_error(A, k, "spectral", singular_values=S0)
    best_f = best_rank_k_error(A, k, "frobenius", singular_values=S0)
    return AccuracyReport(
        singular_value_rel_err=rel.tolist(),
        recon_err_frobenius=fro,
        recon_err_spectral=spectral,
        best_rank_k_err=best_s,
        eps_equivalent=_ratio_minus_one(spectral, best_s),
        pc_correlations=pc_correlation(r.U, U0[:, :k]).tolist(),
        best_rank_k_err_frobenius=best_f,
        eps_equivalent_frobenius=_ratio_minus_one(fro, best_f),
    )
