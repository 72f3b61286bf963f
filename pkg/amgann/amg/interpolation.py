"""
Classical direct interpolation from C-points.
"""

from dataclasses import dataclass
import logging

import numpy as np
import scipy.sparse as sp

from amgann.amg.coarsening import CfSplitting, StrongGraph
from amgann.exceptions import InterpolationError, StructuralError
from amgann.linalg.sparse_core import CsrMatrix, canonicalize

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Interpolation:
    """Prolongation I_H^h (n x n_H) together with the splitting it came from."""
    p: CsrMatrix
    splitting: CfSplitting

    def interpolatory_set(self, i: int) -> np.ndarray:
        """Fine indices of the C-points row i interpolates from."""
        cols = self.p.indices[self.p.indptr[i]:self.p.indptr[i + 1]]
        return self.splitting.coarse_points[cols]

    def weights(self, i: int) -> np.ndarray:
        return self.p.data[self.p.indptr[i]:self.p.indptr[i + 1]]


def build_interpolation(a: CsrMatrix, g: StrongGraph, s: CfSplitting) -> Interpolation:
    """
    Direct interpolation.

    C rows are unit rows. An F-point i interpolates from P_i = S_i ∩ C with

        w_ij = -(a_ij / a_ii) * (sum_{k != i} a_ik) / (sum_{k in P_i} a_ik)

    Raises:
        InterpolationError: an F-point has no C-point to interpolate from
    """
    a = canonicalize(a)
    n = a.shape[0]
    if s.n != n or g.n != n:
        raise StructuralError(f"splitting of size {s.n} does not match a {n}x{n} matrix")

    coarse_index = s.coarse_index()
    rows = np.repeat(np.arange(n), np.diff(a.indptr))
    cols = a.indices
    diagonal = a.diagonal()
    off = cols != rows
    off_sum = np.bincount(rows[off], weights=a.data[off], minlength=n)

    s_rows = np.repeat(np.arange(n), np.diff(g.s.indptr))
    in_strong = np.isin(rows * n + cols, s_rows * n + g.s.indices)

    fine_row = ~s.is_coarse[rows]
    interp = off & in_strong & fine_row & s.is_coarse[cols]
    p_sum = np.bincount(rows[interp], weights=a.data[interp], minlength=n)
    p_count = np.bincount(rows[interp], minlength=n)

    orphans = np.flatnonzero(~s.is_coarse & (p_count == 0))
    if orphans.size:
        raise InterpolationError(int(orphans[0]))

    r = rows[interp]
    weights = -(a.data[interp] / diagonal[r]) * (off_sum[r] / p_sum[r])

    c_points = s.coarse_points
    p_rows = np.concatenate([c_points, r])
    p_cols = np.concatenate([coarse_index[c_points], coarse_index[cols[interp]]])
    p_vals = np.concatenate([np.ones(c_points.size), weights])
    p = canonicalize(sp.coo_matrix((p_vals, (p_rows, p_cols)), shape=(n, s.n_coarse)))
    logger.debug(f"Interpolation: {n} -> {s.n_coarse}, nnz(P)={p.nnz}")
    return Interpolation(p=p, splitting=s)
