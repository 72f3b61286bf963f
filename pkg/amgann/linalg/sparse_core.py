"""
Sparse matrix storage, conversion and products on top of scipy.sparse,
plus the dense LU used on the coarse level.

CooMatrix and CsrMatrix are scipy's coo_matrix / csr_matrix. Every CSR
handed back by this module is canonical: duplicates summed, explicit
zeros dropped, column indices strictly increasing within a row.
"""

from pathlib import Path
from typing import Iterable, Tuple, Union
import logging

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse as sp

from amgann.constants import PIVOT_TOLERANCE
from amgann.exceptions import SingularMatrixError, StructuralError

logger = logging.getLogger(__name__)

CooMatrix = sp.coo_matrix
CsrMatrix = sp.csr_matrix


def coo_from_entries(n_rows: int, n_cols: int,
                     entries: Iterable[Tuple[int, int, float]]) -> CooMatrix:
    """Build a CooMatrix from (row, col, value) triples, duplicates allowed."""
    triples = list(entries)
    if triples:
        rows, cols, vals = (np.asarray(v) for v in zip(*triples))
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0, dtype=np.float64)
    _check_bounds(rows, cols, n_rows, n_cols)
    return sp.coo_matrix((vals.astype(np.float64), (rows.astype(np.int64), cols.astype(np.int64))),
                         shape=(n_rows, n_cols))


def _check_bounds(rows: np.ndarray, cols: np.ndarray, n_rows: int, n_cols: int) -> None:
    if rows.size == 0:
        return
    if rows.min() < 0 or rows.max() >= n_rows:
        raise StructuralError(f"row index out of bounds for {n_rows} rows")
    if cols.min() < 0 or cols.max() >= n_cols:
        raise StructuralError(f"column index out of bounds for {n_cols} columns")


def canonicalize(a: sp.spmatrix) -> CsrMatrix:
    """Return a canonical float64 CSR copy of any scipy sparse matrix."""
    csr = sp.csr_matrix(a, dtype=np.float64, copy=True)
    csr.sum_duplicates()
    csr.eliminate_zeros()
    csr.sort_indices()
    return csr


def coo_to_csr(m: CooMatrix) -> CsrMatrix:
    """
    Convert COO to canonical CSR.

    Duplicate entries are summed and entries that sum to exactly zero are
    dropped.
    """
    coo = sp.coo_matrix(m)
    _check_bounds(coo.row, coo.col, *coo.shape)
    return canonicalize(coo.tocsr())


def csr_to_coo(a: CsrMatrix) -> CooMatrix:
    """Row-major COO view of a canonical CSR matrix."""
    return canonicalize(a).tocoo()


def spmv(a: CsrMatrix, x: np.ndarray) -> np.ndarray:
    """y = A x, accumulated left to right inside each row."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != a.shape[1]:
        raise StructuralError(f"vector of length {x.shape[0] if x.ndim else 0} "
                              f"does not match {a.shape[1]} columns")
    return a @ x


def transpose(a: CsrMatrix) -> CsrMatrix:
    """Canonical CSR of A^T."""
    return canonicalize(a.T)


def triple_product(r: CsrMatrix, a: CsrMatrix, p: CsrMatrix) -> CsrMatrix:
    """Galerkin product R A P as canonical CSR."""
    if r.shape[1] != a.shape[0] or a.shape[1] != p.shape[0]:
        raise StructuralError(f"cannot chain {r.shape} x {a.shape} x {p.shape}")
    return canonicalize((r @ a) @ p)


class DenseLU:
    """LU factorization with partial pivoting of a square dense matrix."""

    def __init__(self, a: np.ndarray):
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise StructuralError(f"LU needs a square matrix, got shape {a.shape}")
        self.n = a.shape[0]
        if self.n == 0:
            self._factors = None
            return
        scale = np.abs(a).max()
        lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
        pivots = np.abs(np.diag(lu))
        if scale == 0.0 or pivots.min() < PIVOT_TOLERANCE * scale:
            raise SingularMatrixError(
                f"pivot {pivots.min():.3e} below {PIVOT_TOLERANCE:g} * max|a| = {scale:.3e}")
        self._factors = (lu, piv)

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=np.float64)
        if b.shape[0] != self.n:
            raise StructuralError(f"right-hand side of length {b.shape[0]} for an {self.n}x{self.n} system")
        if self._factors is None:
            return b.copy()
        return scipy.linalg.lu_solve(self._factors, b, check_finite=False)


def lu_solve_dense(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a x = b with partial-pivoting LU."""
    return DenseLU(a).solve(b)


def read_matrix_market(path: Union[str, Path]) -> CsrMatrix:
    """Read a MatrixMarket coordinate file into canonical CSR."""
    return canonicalize(scipy.io.mmread(str(path)))


def write_matrix_market(path: Union[str, Path], a: sp.spmatrix, comment: str = "") -> None:
    """Write a sparse matrix in MatrixMarket coordinate format."""
    scipy.io.mmwrite(str(path), sp.coo_matrix(a), comment=comment, field="real")
    logger.debug(f"Wrote {a.shape[0]}x{a.shape[1]} matrix ({a.nnz} nnz) to {path}")
