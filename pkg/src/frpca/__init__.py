"""Fast randomized truncated SVD / PCA for large sparse matrices."""
from .dense import eig_svd, gaussian_matrix, lu_basis, orth
from .errors import (ConvergenceError, DimensionMismatchError, MatrixMarketError,
                     MemoryGuardError, RankDeficiencyError)
from .mmio import load_matrix_market, write_matrix_market
from .randsvd import (PcaConfig, SVDResult, auto_pca, basic_rpca, basic_rpcat, eig_svds, frpca,
                      frpcat)
from .sparse import SparseMatrixCSR, count_passes, nnz_stats, sparsify, spmm, spmm_transpose

__version__ = "0.1.0"
