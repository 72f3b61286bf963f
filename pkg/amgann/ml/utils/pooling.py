"""
Pooling of a sparse matrix into an m x m view and the four input
normalizations of the surrogate.
"""

from dataclasses import dataclass
from enum import Enum
import logging

import numpy as np
import scipy.sparse as sp

from amgann.constants import DEFAULT_NORMALIZATION, VIEW_SIZE
from amgann.exceptions import ContractViolation, DegenerateInputError, StructuralError

logger = logging.getLogger(__name__)


class NormalizationMode(str, Enum):
    SUM_STANDARD = "sum-standard"
    SUM_SCALED = "sum-scaled"
    MEAN_STANDARD = "mean-standard"
    MEAN_SCALED = "mean-scaled"

    @property
    def uses_mean(self) -> bool:
        return self.value.startswith("mean")

    @property
    def is_scaled(self) -> bool:
        return self.value.endswith("scaled")


@dataclass(frozen=True)
class View:
    """Bucket sums ``v`` and entry counts ``c`` of an n x n matrix."""
    v: np.ndarray
    c: np.ndarray
    n: int

    @property
    def m(self) -> int:
        return self.v.shape[0]

    def mean_view(self) -> np.ndarray:
        """V / C entry-wise, 0 in empty buckets."""
        out = np.zeros_like(self.v)
        filled = self.c > 0
        out[filled] = self.v[filled] / self.c[filled]
        return out

    def to_bytes(self) -> bytes:
        """m^2 little-endian doubles then m^2 little-endian int64 counts, row-major."""
        return self.v.astype("<f8").tobytes() + self.c.astype("<i8").tobytes()

    @classmethod
    def from_bytes(cls, payload: bytes, m: int, n: int) -> "View":
        size = m * m
        if len(payload) != 16 * size:
            raise StructuralError(f"view payload of {len(payload)} bytes does not hold an {m}x{m} view")
        v = np.frombuffer(payload, dtype="<f8", count=size).reshape(m, m).astype(np.float64)
        c = np.frombuffer(payload, dtype="<i8", count=size, offset=8 * size).reshape(m, m).astype(np.int64)
        return cls(v=v, c=c, n=n)


@dataclass(frozen=True)
class NormalizedView:
    values: np.ndarray
    mode: NormalizationMode


def bucket_index(rows: np.ndarray, n: int, m: int) -> np.ndarray:
    """
    Bucket of each row index: the first p buckets hold q + 1 rows, the
    remaining m - p hold q rows (q = n // m, p = n % m).
    """
    q, p = divmod(n, m)
    t = (q + 1) * p
    rows = np.asarray(rows, dtype=np.int64)
    return np.where(rows < t, rows // (q + 1), (rows - t) // max(q, 1) + p)


def pooling(a: sp.spmatrix, m: int = VIEW_SIZE) -> View:
    """
    Sum the stored entries of ``a`` into an m x m grid of buckets in O(nnz).

    Raises:
        ContractViolation: m is 0 or larger than n
    """
    coo = sp.coo_matrix(a)
    n = coo.shape[0]
    if coo.shape[0] != coo.shape[1]:
        raise StructuralError(f"pooling needs a square matrix, got {coo.shape}")
    if not 1 <= m <= n:
        raise ContractViolation(f"view size m={m} must satisfy 1 <= m <= n={n}")
    bi = bucket_index(coo.row, n, m)
    bj = bucket_index(coo.col, n, m)
    flat = bi * m + bj
    v = np.bincount(flat, weights=coo.data.astype(np.float64), minlength=m * m).reshape(m, m)
    c = np.bincount(flat, minlength=m * m).astype(np.int64).reshape(m, m)
    return View(v=v, c=c, n=n)


def normalize(view: View, mode=DEFAULT_NORMALIZATION) -> NormalizedView:
    """
    Normalize a view for the network.

    Mean modes divide by the counts first. Standard modes then subtract the
    mean over the m^2 entries and divide by the population standard
    deviation; scaled modes divide by the largest magnitude.

    Raises:
        DegenerateInputError: zero standard deviation or all-zero view
    """
    mode = NormalizationMode(mode)
    base = view.mean_view() if mode.uses_mean else view.v.astype(np.float64)
    if mode.is_scaled:
        scale = float(np.abs(base).max())
        if scale == 0.0:
            raise DegenerateInputError("cannot scale an all-zero view")
        values = base / scale
    else:
        mean = base.sum() / base.size
        sigma = float(np.sqrt(np.mean((base - mean) ** 2)))
        if sigma == 0.0:
            raise DegenerateInputError("cannot standardize a constant view")
        values = (base - mean) / sigma
    return NormalizedView(values=values, mode=mode)


def view_of(a: sp.spmatrix, m: int = VIEW_SIZE, mode=DEFAULT_NORMALIZATION) -> NormalizedView:
    """Pool then normalize: the network input of a system matrix."""
    return normalize(pooling(a, m), mode)
