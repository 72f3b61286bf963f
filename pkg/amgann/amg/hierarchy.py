"""
Two-level AMG hierarchy: Gauss-Seidel smoothing, Galerkin coarse operator,
direct coarse solve and one two-level iteration.
"""

from typing import Any, Dict
import logging

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu, spsolve_triangular

from amgann.amg.coarsening import CfSplitting, cf_split, strong_connections
from amgann.amg.interpolation import build_interpolation
from amgann.constants import DEFAULT_NU1, DEFAULT_NU2, DENSE_COARSE_LIMIT
from amgann.exceptions import SingularMatrixError, StructuralError
from amgann.linalg.sparse_core import CsrMatrix, DenseLU, canonicalize, transpose, triple_product

logger = logging.getLogger(__name__)


class GaussSeidel:
    """Forward and backward Gauss-Seidel sweeps for a fixed matrix."""

    def __init__(self, a: CsrMatrix):
        a = canonicalize(a)
        if np.any(a.diagonal() == 0.0):
            zero = int(np.flatnonzero(a.diagonal() == 0.0)[0])
            raise SingularMatrixError(f"zero diagonal entry at row {zero}")
        self.n = a.shape[0]
        self._lower = sp.tril(a, format="csr")
        self._strict_upper = sp.triu(a, k=1, format="csr")
        self._upper = sp.triu(a, format="csr")
        self._strict_lower = sp.tril(a, k=-1, format="csr")

    def sweep(self, u: np.ndarray, f: np.ndarray, sweeps: int, backward: bool = False) -> np.ndarray:
        u = np.array(u, dtype=np.float64, copy=True)
        f = np.asarray(f, dtype=np.float64)
        if u.shape != (self.n,) or f.shape != (self.n,):
            raise StructuralError(f"smoother of size {self.n} got vectors {u.shape} and {f.shape}")
        if sweeps < 0:
            raise ValueError("sweeps must be non-negative")
        for _ in range(sweeps):
            if backward:
                u = spsolve_triangular(self._upper, f - self._strict_lower @ u, lower=False)
            else:
                u = spsolve_triangular(self._lower, f - self._strict_upper @ u, lower=True)
        return u


def smooth(a: CsrMatrix, u: np.ndarray, f: np.ndarray, sweeps: int,
           backward: bool = False) -> np.ndarray:
    """
    Apply ``sweeps`` Gauss-Seidel sweeps to A u = f.

    Forward sweeps are used for pre-smoothing, backward sweeps (``backward``)
    for post-smoothing, so that the pair is symmetric.
    """
    return GaussSeidel(a).sweep(u, f, sweeps, backward=backward)


class CoarseSolver:
    """Direct solver on the coarse level: dense LU up to ``dense_limit`` unknowns, SuperLU above."""

    def __init__(self, a_coarse: CsrMatrix, dense_limit: int = DENSE_COARSE_LIMIT):
        n = a_coarse.shape[0]
        if n <= dense_limit:
            self.kind = "dense-lu"
            self._lu = DenseLU(a_coarse.toarray())
            self._solve = self._lu.solve
        else:
            self.kind = "superlu"
            try:
                factor = splu(sp.csc_matrix(a_coarse))
            except RuntimeError as exc:
                raise SingularMatrixError(f"coarse factorization failed: {exc}") from exc
            self._solve = factor.solve

    def solve(self, b: np.ndarray) -> np.ndarray:
        return self._solve(np.asarray(b, dtype=np.float64))


class TwoLevelHierarchy:
    """
    A_h with prolongation P = I_H^h, restriction R = P^T, Galerkin coarse
    operator A_H = R A_h P and its factorization.

    Built by amg_setup; read-only afterwards.
    """

    def __init__(self, a: CsrMatrix, p: CsrMatrix, splitting: CfSplitting, theta: float,
                 nu1: int = DEFAULT_NU1, nu2: int = DEFAULT_NU2,
                 dense_limit: int = DENSE_COARSE_LIMIT):
        if nu1 < 0 or nu2 < 0:
            raise ValueError("smoothing sweep counts must be non-negative")
        self.a = canonicalize(a)
        self.p = canonicalize(p)
        self.r = transpose(self.p)
        self.a_coarse = triple_product(self.r, self.a, self.p)
        self.coarse = CoarseSolver(self.a_coarse, dense_limit=dense_limit)
        self.smoother = GaussSeidel(self.a)
        self.splitting = splitting
        self.theta = float(theta)
        self.nu1 = int(nu1)
        self.nu2 = int(nu2)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def n_coarse(self) -> int:
        return self.a_coarse.shape[0]

    def stats(self) -> Dict[str, Any]:
        """Sizes of the two levels as a JSON-ready record."""
        return {
            "n": self.n,
            "n_H": self.n_coarse,
            "nnz_A": int(self.a.nnz),
            "nnz_A_H": int(self.a_coarse.nnz),
            "theta": self.theta,
            "degenerate": bool(self.splitting.degenerate),
            "operator_complexity": (self.a.nnz + self.a_coarse.nnz) / max(self.a.nnz, 1),
            "coarse_solver": self.coarse.kind,
        }


def two_level_iteration(h: TwoLevelHierarchy, u: np.ndarray, f: np.ndarray) -> np.ndarray:
    """One two-level iteration: pre-smooth, restrict, solve, correct, post-smooth."""
    u = h.smoother.sweep(u, f, h.nu1)
    residual = f - h.a @ u
    e_coarse = h.coarse.solve(h.r @ residual)
    u = u + h.p @ e_coarse
    return h.smoother.sweep(u, f, h.nu2, backward=True)


def amg_setup(a: CsrMatrix, theta: float, nu1: int = DEFAULT_NU1, nu2: int = DEFAULT_NU2,
              dense_limit: int = DENSE_COARSE_LIMIT) -> TwoLevelHierarchy:
    """
    Build the two-level hierarchy of ``a`` for strong threshold ``theta``.

    Args:
        a: SPD system matrix
        theta: Strong threshold in (0, 1]
        nu1: Pre-smoothing sweeps
        nu2: Post-smoothing sweeps
        dense_limit: Largest coarse size factorised with dense LU

    Returns:
        TwoLevelHierarchy: The assembled hierarchy

    Raises:
        InterpolationError: An F-point has no C-point to interpolate from
    """
    a = canonicalize(a)
    graph = strong_connections(a, theta)
    splitting = cf_split(graph)
    interpolation = build_interpolation(a, graph, splitting)
    hierarchy = TwoLevelHierarchy(a, interpolation.p, splitting, theta,
                                  nu1=nu1, nu2=nu2, dense_limit=dense_limit)
    logger.debug(f"AMG setup theta={theta:.4f}: n={hierarchy.n}, n_H={hierarchy.n_coarse}, "
                 f"nnz(A_H)={hierarchy.a_coarse.nnz}")
    return hierarchy
