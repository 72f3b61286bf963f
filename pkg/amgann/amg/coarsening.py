"""
Strong connections and classical Ruge-Stueben C/F splitting.
"""

from dataclasses import dataclass
import heapq
import logging

import numpy as np
import scipy.sparse as sp

from amgann.exceptions import ContractViolation, StructuralError
from amgann.linalg.sparse_core import CsrMatrix, canonicalize

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StrongGraph:
    """
    Strong dependencies of a matrix.

    ``s`` is a boolean CSR pattern with s[i, j] set when i strongly depends
    on j; ``st`` is its transpose (the points that depend on i).
    """
    s: CsrMatrix
    st: CsrMatrix
    theta: float

    @property
    def n(self) -> int:
        return self.s.shape[0]

    def depends_on(self, i: int) -> np.ndarray:
        """S_i, sorted."""
        return self.s.indices[self.s.indptr[i]:self.s.indptr[i + 1]]

    def influences(self, i: int) -> np.ndarray:
        """S^T_i = {j : i in S_j}, sorted."""
        return self.st.indices[self.st.indptr[i]:self.st.indptr[i + 1]]

    def measures(self) -> np.ndarray:
        """|S^T_i| for every point."""
        return np.diff(self.st.indptr)


def strong_connections(a: CsrMatrix, theta: float) -> StrongGraph:
    """
    j is in S_i iff -a_ij >= theta * max_{k != i} (-a_ik), j != i.

    Rows without a negative off-diagonal entry have no strong dependencies.
    """
    if not 0.0 < theta <= 1.0:
        raise ContractViolation(f"strong threshold must lie in (0, 1], got {theta}")
    if a.shape[0] != a.shape[1]:
        raise StructuralError(f"strong connections need a square matrix, got {a.shape}")
    a = canonicalize(a)
    n = a.shape[0]
    rows = np.repeat(np.arange(n), np.diff(a.indptr))
    negative = (a.indices != rows) & (a.data < 0.0)
    magnitude = np.where(negative, -a.data, 0.0)
    row_max = np.zeros(n)
    np.maximum.at(row_max, rows, magnitude)
    strong = negative & (magnitude >= theta * row_max[rows])

    s = sp.csr_matrix((np.ones(int(strong.sum()), dtype=bool),
                       (rows[strong], a.indices[strong])), shape=(n, n))
    s.sort_indices()
    st = sp.csr_matrix(s.T)
    st.sort_indices()
    return StrongGraph(s=s, st=st, theta=float(theta))


@dataclass(frozen=True)
class CfSplitting:
    """
    C/F labels; ``degenerate`` marks the all-C fallback taken when the
    strong graph is empty.
    """
    is_coarse: np.ndarray
    degenerate: bool = False

    @property
    def n(self) -> int:
        return self.is_coarse.shape[0]

    @property
    def n_coarse(self) -> int:
        return int(self.is_coarse.sum())

    @property
    def coarse_points(self) -> np.ndarray:
        return np.flatnonzero(self.is_coarse)

    @property
    def fine_points(self) -> np.ndarray:
        return np.flatnonzero(~self.is_coarse)

    def coarse_index(self) -> np.ndarray:
        """Coarse numbering of C-points, -1 on F-points."""
        index = np.full(self.n, -1, dtype=np.int64)
        index[self.is_coarse] = np.arange(self.n_coarse)
        return index


_UNDECIDED, _COARSE, _FINE = 0, 1, 2


def cf_split(g: StrongGraph) -> CfSplitting:
    """
    Ruge-Stueben first pass.

    The undecided point of largest measure |S^T_i| (lowest index on ties)
    becomes C, every undecided point depending on it becomes F, and each new
    F raises the measure of its undecided strong dependencies. Points without
    any strong connection are picked last, at measure 0, and end up C.
    A graph with no strong connection at all takes the all-C fallback.
    """
    n = g.n
    if g.s.nnz == 0:
        logger.warning(f"No strong connections at theta={g.theta}; using all-C fallback")
        return CfSplitting(is_coarse=np.ones(n, dtype=bool), degenerate=True)

    measure = g.measures().astype(np.int64)
    state = np.full(n, _UNDECIDED, dtype=np.int8)
    heap = [(-int(measure[i]), i) for i in range(n)]
    heapq.heapify(heap)
    while heap:
        neg_lambda, i = heapq.heappop(heap)
        if state[i] != _UNDECIDED or -neg_lambda != measure[i]:
            continue
        state[i] = _COARSE
        for j in g.influences(i):
            if state[j] != _UNDECIDED:
                continue
            state[j] = _FINE
            for k in g.depends_on(j):
                if state[k] == _UNDECIDED:
                    measure[k] += 1
                    heapq.heappush(heap, (-int(measure[k]), int(k)))

    return CfSplitting(is_coarse=state == _COARSE)
