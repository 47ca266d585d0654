"""
Sparse SPD factorization of the global matrix, reused for every right-hand side.

CHOLMOD (scikit-sparse) is used when installed; otherwise SciPy's SuperLU
with symmetric-mode diagonal pivoting, which is an LDL^T-like factorization
whose U diagonal must stay positive for an SPD matrix.
"""

from typing import Optional

import numpy as np
import scipy.sparse as sp
from loguru import logger
from scipy.sparse.linalg import splu

from src.config.settings import FactorizationBackend, runtime_settings
from src.errors import FactorizationError

try:
    from sksparse.cholmod import CholmodNotPositiveDefiniteError, cholesky
except ImportError:
    cholesky = None
    CholmodNotPositiveDefiniteError = None


class Factorization:
    def __init__(self, matrix: sp.csc_matrix, backend: str, solver):
        self.matrix = matrix
        self.backend = backend
        self._solver = solver

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve for one (n,) or several (n, k) right-hand sides."""
        rhs = np.asarray(rhs, dtype=np.float64)
        if rhs.ndim == 1:
            return np.asarray(self._solver(rhs)).reshape(-1)
        return np.column_stack([np.asarray(self._solver(rhs[:, k])).reshape(-1) for k in range(rhs.shape[1])])


def _cholmod(matrix: sp.csc_matrix) -> Factorization:
    try:
        factor = cholesky(matrix)
    except CholmodNotPositiveDefiniteError as exc:
        raise FactorizationError(f"global matrix is not positive definite: {exc}", pivot=getattr(exc, "column", None)) from exc
    return Factorization(matrix, FactorizationBackend.CHOLMOD.value, factor)


def _splu(matrix: sp.csc_matrix) -> Factorization:
    try:
        lu = splu(matrix, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0, options=dict(SymmetricMode=True))
    except RuntimeError as exc:
        raise FactorizationError(f"global matrix is singular: {exc}") from exc

    pivots = lu.U.diagonal()
    bad = np.flatnonzero(~(pivots > 0))
    if len(bad):
        # perm_c maps original columns to factored positions.
        pivot = int(np.flatnonzero(lu.perm_c == bad[0])[0])
        raise FactorizationError(f"global matrix is not positive definite (pivot at vertex {pivot})", pivot=pivot)
    return Factorization(matrix, FactorizationBackend.SPLU.value, lu.solve)


def factorize(matrix, backend: Optional[FactorizationBackend] = None) -> Factorization:
    """
    Factorize a symmetric positive definite sparse matrix.

    Raises:
        FactorizationError: matrix singular or not positive definite; `pivot` names the offending row when known
    """
    matrix = sp.csc_matrix(matrix, dtype=np.float64)
    backend = FactorizationBackend(backend or runtime_settings.factorization)

    if backend is FactorizationBackend.CHOLMOD and cholesky is None:
        raise FactorizationError("CHOLMOD backend requested but scikit-sparse is not installed")
    if backend is FactorizationBackend.CHOLMOD or (backend is FactorizationBackend.AUTO and cholesky is not None):
        result = _cholmod(matrix)
    else:
        result = _splu(matrix)
    logger.debug(f"Factorized {result.size}x{result.size} global matrix ({matrix.nnz} nnz) with {result.backend}")
    return result
