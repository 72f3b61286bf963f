import numpy as np
import pytest
import scipy.sparse as sp

from amgann.dataset.corpus import Sample, SampleRecord
from amgann.fem.problem import ProblemSpec
from amgann.ml.utils.pooling import View


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run the acceptance-scale tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale test, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def laplacian_1d(n: int) -> sp.csr_matrix:
    """tridiag(-1, 2, -1)"""
    return sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1], format="csr")


def laplacian_2d(k: int) -> sp.csr_matrix:
    """5-point Laplacian on a k x k interior grid."""
    t = laplacian_1d(k)
    eye = sp.identity(k, format="csr")
    return sp.csr_matrix(sp.kron(eye, t) + sp.kron(t, eye))


@pytest.fixture
def lap1d():
    return laplacian_1d


@pytest.fixture
def lap2d():
    return laplacian_2d


@pytest.fixture
def poisson_problem():
    return ProblemSpec.build("a", 8, epsilon=0.0)


@pytest.fixture
def checkerboard_problem():
    return ProblemSpec.build("d", 16, epsilon=2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def synthetic_sample(dataset="ds1", pattern="a", epsilon=1.0, epsilons=None, cells=8, theta=0.24,
                     rho=0.1, m=4, elapsed=0.0, repetitions=0, seed=0):
    """A corpus sample with a random view, no solve involved."""
    rng = np.random.default_rng(seed)
    record = SampleRecord(
        dataset=dataset, pattern=pattern, epsilon=None if epsilons else epsilon, epsilons=epsilons,
        N=cells, solution="cos-pi" if pattern in ("a", "b") else "cos-2pi",
        neg_log2_h=int(np.log2(cells)), theta=theta, rho=rho, iterations=5, converged=True,
        n=(cells - 1) ** 2, n_coarse=(cells - 1) ** 2 // 2, m=m,
        elapsed_mean=elapsed, elapsed_std=0.0, repetitions=repetitions,
    )
    view = View(v=rng.standard_normal((m, m)), c=rng.integers(1, 5, size=(m, m)), n=record.n)
    return Sample(record=record, view=view)


@pytest.fixture
def make_sample():
    return synthetic_sample
