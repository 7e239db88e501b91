"""Randomized truncated SVD / PCA for sparse matrices.

Two baselines (sketch on the right, sketch on the left), their fast
counterparts with an arbitrary pass count ``q``, a Gram-matrix method for
tall matrices, and a shape-based dispatcher.
"""
from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .dense import economic_svd_short_fat, eig_svd, gaussian_matrix, lu_basis, orth
from .errors import DimensionMismatchError, MemoryGuardError, RankDeficiencyError
from .sparse import SparseMatrixCSR, count_passes, record_pass, spmm, spmm_transpose

__all__ = [
    "PcaConfig",
    "SVDResult",
    "basic_rpca",
    "basic_rpcat",
    "eig_svds",
    "frpca",
    "frpcat",
    "auto_pca",
    "ALGORITHMS",
    "run_algorithm",
    "stage_rng",
    "GRAM_LIMIT",
]

GRAM_LIMIT = 20_000

# stream ids derived from the root seed; keep stable, tests pair runs through them
_STAGES = {"sketch": 0}


def stage_rng(seed, stage: str = "sketch") -> np.random.Generator:
    """Generator for one pipeline stage, derived from the root ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_STAGES[stage],)))


@dataclass(frozen=True)
class PcaConfig:
    k: int
    s: int = 5
    q: int | None = None
    p: int | None = None
    seed: int | None = 0
    deterministic: bool = False

    @property
    def l(self) -> int:
        return self.k + self.s

    def check(self, shape: tuple[int, int], *, needs: str) -> None:
        m, n = shape
        if self.k < 1 or self.s < 0:
            raise ValueError(f"need k >= 1 and s >= 0, got k={self.k}, s={self.s}")
        if self.l > min(m, n):
            raise ValueError(f"k + s = {self.l} exceeds min(m, n) = {min(m, n)}")
        if needs == "q" and (self.q is None or self.q < 2):
            raise ValueError(f"pass count q >= 2 required, got {self.q}")
        if needs == "p" and (self.p is None or self.p < 0):
            raise ValueError(f"power count p >= 0 required, got {self.p}")


@dataclass
class SVDResult:
    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    k: int
    info: dict = field(default_factory=dict)

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.S) @ self.V.T


class _Stages:
    def __init__(self):
        self.seconds: dict[str, float] = {}

    @contextmanager
    def __call__(self, name):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.seconds[name] = self.seconds.get(name, 0.0) + time.perf_counter() - t0


def _omega(omega, shape, seed) -> np.ndarray:
    if omega is None:
        return gaussian_matrix(*shape, stage_rng(seed))
    omega = np.asarray(omega, dtype=np.float64)
    if omega.shape != shape:
        raise DimensionMismatchError(f"injected sketch has shape {omega.shape}, expected {shape}")
    return omega


def _finish(U, S, V, k, name, counter, stages, **extra) -> SVDResult:
    info = {"algorithm": name, "passes": counter.passes, "timings": dict(stages.seconds)}
    info.update(extra)
    return SVDResult(np.ascontiguousarray(U), np.ascontiguousarray(S), np.ascontiguousarray(V), k, info)


def basic_rpca(A: SparseMatrixCSR, cfg: PcaConfig, omega=None) -> SVDResult:
    """Right-sketch randomized SVD with ``p`` QR-stabilised power iterations.

    Makes ``2p + 2`` passes over ``A``. ``omega`` (n x l) overrides the
    seeded Gaussian sketch.
    """
    m, n = A.shape
    cfg.check(A.shape, needs="p")
    det = cfg.deterministic
    stages = _Stages()
    with count_passes() as counter:
        with stages("sketch"):
            Omega = _omega(omega, (n, cfg.l), cfg.seed)
            Q = orth(spmm(A, Omega, deterministic=det))
        with stages("power_iterations"):
            for _ in range(cfg.p):
                G = orth(spmm_transpose(A, Q, deterministic=det))
                Q = orth(spmm(A, G, deterministic=det))
        with stages("finalize"):
            B = spmm_transpose(A, Q, deterministic=det).T
            Ub, S, V = economic_svd_short_fat(B)
            U = Q @ Ub[:, :cfg.k]
    return _finish(U, S[:cfg.k], V[:, :cfg.k], cfg.k, "basic_rpca", counter, stages, p=cfg.p)


def basic_rpcat(A: SparseMatrixCSR, cfg: PcaConfig, omega=None) -> SVDResult:
    """Left-sketch variant of :func:`basic_rpca`; ``omega`` is ``l x m``."""
    m, n = A.shape
    cfg.check(A.shape, needs="p")
    det = cfg.deterministic
    stages = _Stages()
    with count_passes() as counter:
        with stages("sketch"):
            Omega = _omega(omega, (cfg.l, m), cfg.seed)
            Q = orth(spmm_transpose(A, Omega.T, deterministic=det))
        with stages("power_iterations"):
            for _ in range(cfg.p):
                G = orth(spmm(A, Q, deterministic=det))
                Q = orth(spmm_transpose(A, G, deterministic=det))
        with stages("finalize"):
            B = spmm(A, Q, deterministic=det).T
            Uh, S, Vh = economic_svd_short_fat(B)
            V = Q @ Uh[:, :cfg.k]
    return _finish(Vh[:, :cfg.k], S[:cfg.k], V, cfg.k, "basic_rpcat", counter, stages, p=cfg.p)


def _top_k_descending(cfg: PcaConfig) -> np.ndarray:
    # eig_svd returns ascending values: columns l-1, ..., s are the top k, largest first
    return np.arange(cfg.l - 1, cfg.s - 1, -1)


def frpca(A: SparseMatrixCSR, cfg: PcaConfig, omega=None) -> SVDResult:
    """Fast randomized PCA for ``m <= n`` using exactly ``q`` passes over ``A``.

    Power iterations orthonormalise after every second product, with an LU
    basis everywhere except the last iteration, which uses ``eig_svd`` so the
    final projection sees an orthonormal basis. Odd ``q`` starts from a
    Gaussian ``m x l`` block instead of ``A @ omega``; for even ``q`` the
    injected ``omega`` is ``n x l``, for odd ``q`` it is ``m x l``.
    """
    m, n = A.shape
    if m > n:
        raise DimensionMismatchError(f"frpca expects m <= n, got {A.shape}; use frpcat")
    cfg.check(A.shape, needs="q")
    q, det = cfg.q, cfg.deterministic
    stages = _Stages()
    with count_passes() as counter:
        with stages("sketch"):
            if q % 2 == 0:
                Q = spmm(A, _omega(omega, (n, cfg.l), cfg.seed), deterministic=det)
                Q = lu_basis(Q) if q > 2 else eig_svd(Q).U
            else:
                Q = _omega(omega, (m, cfg.l), cfg.seed)
        with stages("power_iterations"):
            n_iter = (q - 1) // 2
            for i in range(1, n_iter + 1):
                Y = spmm(A, spmm_transpose(A, Q, deterministic=det), deterministic=det)
                Q = eig_svd(Y).U if i == n_iter else lu_basis(Y)
        with stages("finalize"):
            r = eig_svd(spmm_transpose(A, Q, deterministic=det))
            ind = _top_k_descending(cfg)
            U = Q @ r.V[:, ind]
    return _finish(U, r.S[ind], r.U[:, ind], cfg.k, "frpca", counter, stages, q=q)


def frpcat(A: SparseMatrixCSR, cfg: PcaConfig, omega=None) -> SVDResult:
    """Mirror of :func:`frpca` for ``m >= n``; sketches from the left.

    Injected ``omega`` is ``l x m`` for even ``q`` and ``n x l`` for odd ``q``.
    """
    m, n = A.shape
    if m < n:
        raise DimensionMismatchError(f"frpcat expects m >= n, got {A.shape}; use frpca")
    cfg.check(A.shape, needs="q")
    q, det = cfg.q, cfg.deterministic
    stages = _Stages()
    with count_passes() as counter:
        with stages("sketch"):
            if q % 2 == 0:
                Omega = _omega(omega, (cfg.l, m), cfg.seed)
                Q = spmm_transpose(A, Omega.T, deterministic=det)
                Q = eig_svd(Q).U if q == 2 else lu_basis(Q)
            else:
                Q = _omega(omega, (n, cfg.l), cfg.seed)
        with stages("power_iterations"):
            n_iter = (q - 1) // 2
            for i in range(1, n_iter + 1):
                Y = spmm_transpose(A, spmm(A, Q, deterministic=det), deterministic=det)
                Q = eig_svd(Y).U if i == n_iter else lu_basis(Y)
        with stages("finalize"):
            r = eig_svd(spmm(A, Q, deterministic=det))
            ind = _top_k_descending(cfg)
            V = Q @ r.V[:, ind]
    return _finish(r.U[:, ind], r.S[ind], V, cfg.k, "frpcat", counter, stages, q=q)


def auto_pca(A: SparseMatrixCSR, cfg: PcaConfig, omega=None) -> SVDResult:
    """frpca for wide matrices, frpcat otherwise (square included)."""
    m, n = A.shape
    impl = frpca if m < n else frpcat
    res = impl(A, cfg, omega)
    res.info["path"] = impl.__name__
    return res


def eig_svds(A: SparseMatrixCSR, k: int, *, gram_limit: int = GRAM_LIMIT) -> SVDResult:
    """Exact top-``k`` SVD of a tall matrix from the dense ``n x n`` Gram matrix.

    Raises :class:`MemoryGuardError` instead of allocating a Gram matrix with
    more than ``gram_limit`` rows.
    """
    m, n = A.shape
    if n > gram_limit:
        raise MemoryGuardError(
            f"memory guard: dense Gram matrix would be {n} x {n} (gram_limit={gram_limit})")
    if m < n:
        raise DimensionMismatchError(f"eig_svds expects m >= n, got {A.shape}")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}")
    stages = _Stages()
    with count_passes() as counter:
        with stages("sketch"):
            S_ = A.to_scipy()
            G = (S_.T @ S_).toarray()
            record_pass("gram")
        with stages("power_iterations"):
            w, V = scipy.linalg.eigh(G, subset_by_index=[n - k, n - 1])
            w, V = w[::-1], V[:, ::-1]
            if w[-1] <= n * np.finfo(float).eps * max(w[0], 0.0):
                raise RankDeficiencyError(f"eig_svds: eigenvalue {w[-1]:.3e} of the Gram matrix is not positive")
        with stages("finalize"):
            S = np.sqrt(w)
            U = spmm(A, V) / S
    return _finish(U, S, V, k, "eig_svds", counter, stages)


ALGORITHMS = {
    "frpca": frpca,
    "frpcat": frpcat,
    "auto": auto_pca,
    "basic": basic_rpca,
    "basict": basic_rpcat,
    "eigsvds": None,  # takes k directly, see run_algorithm
}

FAST = ("frpca", "frpcat", "auto")
BASELINES = ("basic", "basict")


def run_algorithm(name: str, A: SparseMatrixCSR, cfg: PcaConfig, **kw) -> SVDResult:
    """Dispatch by CLI name."""
    if name not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {name!r}; choose from {sorted(ALGORITHMS)}")
    if name == "eigsvds":
        return eig_svds(A, cfg.k, **kw)
    return ALGORITHMS[name](A, cfg, **kw)
