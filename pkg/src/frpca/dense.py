"""Dense building blocks: sketches, QR/LU bases and the Gram-matrix SVD.

Dense matrices are plain 2-D ``float64`` ndarrays throughout.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DimensionMismatchError, RankDeficiencyError

EPS = np.finfo(np.float64).eps
MAX_SWEEPS = 60


def gaussian_matrix(rows: int, cols: int, seed=None) -> np.ndarray:
    """i.i.d. N(0, 1) matrix; ``seed`` may be an int or a ``numpy.random.Generator``."""
    if rows < 1 or cols < 1:
        raise ValueError(f"gaussian_matrix needs positive dimensions, got {rows} x {cols}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return rng.standard_normal((rows, cols))


def _tall(M, name: str) -> np.ndarray:
    M = np.asarray(M, dtype=np.float64)
    if M.ndim == 1:
        M = M[:, None]
    if M.ndim != 2:
        raise DimensionMismatchError(f"{name} expects a 2-D array")
    if M.shape[0] < M.shape[1]:
        raise DimensionMismatchError(f"{name} expects rows >= cols, got {M.shape}")
    return M


def _check_diagonal(d: np.ndarray, size: int, what: str) -> None:
    d = np.abs(d)
    top = d.max() if d.size else 0.0
    if d.size and d.min() <= size * EPS * top:
        raise RankDeficiencyError(
            f"{what}: smallest diagonal {d.min():.3e} vs largest {top:.3e}; input is rank deficient")


def orth(M) -> np.ndarray:
    """Orthonormal basis of ``range(M)`` via Householder QR."""
    M = _tall(M, "orth")
    Q, R = np.linalg.qr(M)
    _check_diagonal(np.diag(R), max(M.shape), "orth")
    return Q


def lu_basis(M) -> np.ndarray:
    """``P.T @ L`` from the partially pivoted factorisation ``P M = L U``.

    Same column space as ``M`` with entries bounded by one in magnitude; not
    orthonormal.
    """
    M = _tall(M, "lu_basis")
    PL, U = scipy.linalg.lu(M, permute_l=True, check_finite=False)
    _check_diagonal(np.diag(U), max(M.shape), "lu_basis")
    return PL


@numba.njit(cache=True)
def _jacobi_sweeps(A, V, max_sweeps):
    n = A.shape[0]
    eps = 2.220446049250313e-16
    for sweep in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                app = A[p, p]
                aqq = A[q, q]
                if abs(apq) <= eps * np.sqrt(abs(app * aqq)):
                    A[p, q] = 0.0
                    A[q, p] = 0.0
                    continue
                rotated = True
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    if k != p and k != q:
                        akp = A[k, p]
                        akq = A[k, q]
                        A[k, p] = c * akp - s * akq
                        A[p, k] = A[k, p]
                        A[k, q] = s * akp + c * akq
                        A[q, k] = A[k, q]
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                A[p, q] = 0.0
                A[q, p] = 0.0
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
        if not rotated:
            return sweep + 1
    return -1


def eig_sym(B) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi.

    Returns ``(V, D)`` with ``D`` ascending and ``B = V diag(D) V.T``.
    Rotations are skipped once ``|b_pq| <= eps * sqrt(|b_pp b_qq|)``, which
    keeps small eigenvalues of a definite matrix relatively accurate.
    """
    B = np.asarray(B, dtype=np.float64)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise DimensionMismatchError(f"eig_sym expects a square matrix, got {B.shape}")
    scale = np.linalg.norm(B)
    if np.linalg.norm(B - B.T) > 1e-12 * scale:
        raise ValueError("eig_sym: input is not symmetric")
    A = 0.5 * (B + B.T)
    V = np.eye(B.shape[0])
    if _jacobi_sweeps(A, V, MAX_SWEEPS) < 0:
        raise ConvergenceError(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")
    D = np.diag(A).copy()
    order = np.argsort(D, kind="stable")
    return V[:, order], D[order]


@dataclass(frozen=True)
class EigSvdResult:
    U: np.ndarray
    S: np.ndarray  # ascending
    V: np.ndarray


def eig_svd(A) -> EigSvdResult:
    """Economic SVD of a tall matrix through the eigenpairs of ``A.T @ A``.

    Singular values come out ascending. Raises :class:`RankDeficiencyError`
    when the smallest Gram eigenvalue is within ``n * eps`` of the largest,
    since ``U = A V / S`` is meaningless there.
    """
    A = _tall(A, "eig_svd")
    n = A.shape[1]
    V, D = eig_sym(A.T @ A)
    if D[-1] <= 0.0 or D[0] <= n * EPS * D[-1]:
        raise RankDeficiencyError(
            f"eig_svd: Gram eigenvalues span [{D[0]:.3e}, {D[-1]:.3e}]; input lacks full column rank")
    S = np.sqrt(D)
    U = (A @ V) / S
    return EigSvdResult(U, S, V)


def economic_svd_short_fat(B) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """SVD of a short-fat ``l x n`` block as ``(U, S, V)`` with ``S`` descending."""
    B = np.asarray(B, dtype=np.float64)
    if B.ndim != 2 or B.shape[0] > B.shape[1]:
        raise DimensionMismatchError(f"expected rows <= cols, got {B.shape}")
    r = eig_svd(B.T)
    return r.V[:, ::-1], r.S[::-1], r.U[:, ::-1]
