import time

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from amgann.amg.hierarchy import amg_setup
from amgann.amg.solver import pcg
from amgann.exceptions import ContractViolation, DegenerateInputError, StructuralError
from amgann.fem.assembly import assemble
from amgann.fem.problem import ProblemSpec
from amgann.ml.utils.pooling import NormalizationMode, View, bucket_index, normalize, pooling, view_of


def _dense_pooling(dense, m):
    n = dense.shape[0]
    q, p = divmod(n, m)
    sizes = [q + 1] * p + [q] * (m - p)
    edges = np.cumsum(sizes)
    v = np.zeros((m, m))
    c = np.zeros((m, m), dtype=np.int64)
    for i, j in zip(*np.nonzero(dense)):
        bi = int(np.searchsorted(edges, i, side="right"))
        bj = int(np.searchsorted(edges, j, side="right"))
        v[bi, bj] += dense[i, j]
        c[bi, bj] += 1
    return v, c


def test_bucket_sizes():
    assert list(bucket_index(np.arange(5), 5, 2)) == [0, 0, 0, 1, 1]
    assert list(bucket_index(np.arange(7), 7, 3)) == [0, 0, 0, 1, 1, 2, 2]
    assert list(bucket_index(np.arange(4), 4, 4)) == [0, 1, 2, 3]


def test_small_laplacian_view(lap1d):
    view = pooling(lap1d(4), 2)
    assert np.array_equal(view.v, [[2.0, -1.0], [-1.0, 2.0]])
    assert np.array_equal(view.c, [[4, 1], [1, 4]])
    assert view.m == 2 and view.n == 4


@settings(max_examples=60, deadline=None)
@given(n=st.integers(min_value=1, max_value=60), data=st.data())
def test_pooling_matches_dense_bucketization(n, data):
    m = data.draw(st.integers(min_value=1, max_value=n))
    seed = data.draw(st.integers(min_value=0, max_value=2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    dense = rng.integers(-3, 4, size=(n, n)) * (rng.random((n, n)) < 0.2)
    view = pooling(sp.csr_matrix(dense.astype(np.float64)), m)
    v, c = _dense_pooling(dense, m)
    assert np.allclose(view.v, v)
    assert np.array_equal(view.c, c)


def test_view_size_contract(lap1d):
    with pytest.raises(ContractViolation):
        pooling(lap1d(4), 0)
    with pytest.raises(ContractViolation):
        pooling(lap1d(4), 5)
    with pytest.raises(StructuralError):
        pooling(sp.csr_matrix(np.ones((2, 3))), 1)


def test_view_bytes_round_trip(lap2d):
    view = pooling(lap2d(5), 4)
    back = View.from_bytes(view.to_bytes(), 4, view.n)
    assert np.array_equal(back.v, view.v) and np.array_equal(back.c, view.c)
    with pytest.raises(StructuralError):
        View.from_bytes(view.to_bytes()[:-1], 4, view.n)


def test_mean_view_leaves_empty_buckets_zero():
    view = View(v=np.array([[4.0, 0.0], [0.0, 3.0]]), c=np.array([[2, 0], [0, 3]]), n=4)
    assert np.array_equal(view.mean_view(), [[2.0, 0.0], [0.0, 1.0]])


@pytest.mark.parametrize("mode", [m.value for m in NormalizationMode if not m.is_scaled])
def test_standard_modes(checkerboard_problem, mode):
    a, _ = assemble(checkerboard_problem)
    values = view_of(a, 10, mode).values
    assert values.mean() == pytest.approx(0.0, abs=1e-12)
    assert values.std() == pytest.approx(1.0)


@pytest.mark.parametrize("mode", [m.value for m in NormalizationMode if m.is_scaled])
def test_scaled_modes(checkerboard_problem, mode):
    a, _ = assemble(checkerboard_problem)
    values = view_of(a, 10, mode).values
    assert np.abs(values).max() == pytest.approx(1.0)


def test_degenerate_views():
    flat = View(v=np.full((2, 2), 3.0), c=np.ones((2, 2), dtype=np.int64), n=4)
    with pytest.raises(DegenerateInputError):
        normalize(flat, "sum-standard")
    zero = View(v=np.zeros((2, 2)), c=np.zeros((2, 2), dtype=np.int64), n=4)
    with pytest.raises(DegenerateInputError):
        normalize(zero, "mean-scaled")
    with pytest.raises(ValueError):
        normalize(flat, "median")


def test_standardized_view_is_scale_invariant(checkerboard_problem):
    a, _ = assemble(checkerboard_problem)
    assert np.allclose(view_of(a, 8).values, view_of(7.5 * a, 8).values)


@pytest.mark.slow
def test_pooling_of_fine_system_is_cheap():
    a, f = assemble(ProblemSpec.build("d", 128, epsilon=3.5))
    start = time.process_time()
    pooling(a, 50)
    pool_time = time.process_time() - start
    _, report = pcg(a, f, amg_setup(a, 0.24))
    assert pool_time < 0.05 * report.elapsed or pool_time < 0.01
