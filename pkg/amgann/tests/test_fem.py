import math

import numpy as np
import pytest
import scipy.sparse.linalg as spla
from pydantic import ValidationError

from amgann.exceptions import ContractViolation, StructuralError
from amgann.fem.assembly import assemble, exact_solution, forcing, l2_error, nodal_exact
from amgann.fem.problem import (
    DiffusionPattern, ExactSolution, PatternKind, ProblemSpec, StructuredMesh, mu_eval, mu_field,
)


def test_mesh_properties():
    mesh = StructuredMesh(cells_per_side=16)
    assert mesh.h == 1.0 / 16
    assert mesh.level == 4
    assert mesh.spacing == 0.125
    assert mesh.n_nodes == 17 * 17
    assert mesh.n_interior == 15 * 15
    assert mesh.interior_mask().sum() == mesh.n_interior


def test_node_numbering():
    mesh = StructuredMesh(cells_per_side=4)
    xs, ys = mesh.node_xy()
    # node (i, j) at j (N + 1) + i
    assert (xs[7], ys[7]) == (pytest.approx(0.0), pytest.approx(-0.5))
    assert (xs[24], ys[24]) == (pytest.approx(1.0), pytest.approx(1.0))


@pytest.mark.parametrize("cells", [0, 1, 3, 12])
def test_mesh_rejects_non_power_of_two(cells):
    with pytest.raises(ValidationError):
        StructuredMesh(cells_per_side=cells)


@pytest.mark.parametrize("kind, x, y, expected", [
    ("a", -0.5, 0.3, 10.0),
    ("a", 0.5, 0.3, 1.0),
    ("a", -1.0, 0.0, 10.0),
    ("b", -0.5, -0.5, 1.0),
    ("b", 0.5, -0.5, 10.0),
    ("c", -0.75, 0.9, 10.0),
    ("c", -0.25, 0.9, 1.0),
    ("d", -0.75, -0.75, 1.0),
    ("d", -0.25, -0.75, 10.0),
])
def test_single_exponent_patterns(kind, x, y, expected):
    pattern = DiffusionPattern(kind=PatternKind(kind), epsilon=1.0)
    assert mu_eval(pattern, x, y) == pytest.approx(expected)


def test_exponent_pair():
    pattern = DiffusionPattern(kind=PatternKind.CHECKERBOARD_4X4, epsilons=(1.0, 2.0))
    assert mu_eval(pattern, -0.75, -0.75) == pytest.approx(100.0)
    assert mu_eval(pattern, -0.25, -0.75) == pytest.approx(10.0)
    assert pattern.exponents == (1.0, 2.0)


def test_zero_exponent_is_uniform():
    pattern = DiffusionPattern(kind=PatternKind.CHECKERBOARD_2X2, epsilon=0.0)
    xs = np.array([-0.7, 0.2, 0.6, -0.1])
    ys = np.array([0.3, -0.4, 0.9, -0.9])
    assert np.all(mu_field(pattern, xs, ys) == 1.0)


def test_interface_evaluation_rejected():
    pattern = DiffusionPattern(kind=PatternKind.TWO_STRIDES, epsilon=1.0)
    with pytest.raises(ContractViolation):
        mu_eval(pattern, 0.0, 0.3)
    # strides only have vertical interfaces
    assert mu_eval(pattern, 0.5, 0.0) == pytest.approx(1.0)
    with pytest.raises(ContractViolation):
        mu_eval(pattern, 1.5, 0.0)


def test_pattern_needs_one_exponent_form():
    with pytest.raises(ValidationError):
        DiffusionPattern(kind=PatternKind.TWO_STRIDES)
    with pytest.raises(ValidationError):
        DiffusionPattern(kind=PatternKind.TWO_STRIDES, epsilon=1.0, epsilons=(1.0, 2.0))


def test_problem_pairs_solution():
    assert ProblemSpec.build("a", 8, epsilon=0.0).solution is ExactSolution.COS_PI
    assert ProblemSpec.build("d", 8, epsilon=0.0).solution is ExactSolution.COS_2PI
    with pytest.raises(ValidationError):
        ProblemSpec(mesh=StructuredMesh(cells_per_side=8),
                    pattern=DiffusionPattern(kind=PatternKind.FOUR_STRIDES, epsilon=1.0),
                    solution=ExactSolution.COS_PI)


def test_fine_patterns_need_four_cells():
    with pytest.raises(ValidationError):
        ProblemSpec.build("c", 2, epsilon=1.0)
    assert ProblemSpec.build("c", 4, epsilon=1.0).mesh.cells_per_side == 4


def test_problem_record_round_trip():
    for problem in (ProblemSpec.build("b", 16, epsilon=2.4), ProblemSpec.build("c", 8, epsilons=(0.5, 3.0))):
        assert ProblemSpec.from_record(problem.to_record()) == problem
    assert ProblemSpec.build("b", 16, epsilon=2.4).key == ("b", (2.4,), 16)


def test_forcing_is_minus_mu_laplacian():
    problem = ProblemSpec.build("a", 8, epsilon=1.0)
    x, y = np.array([-0.3]), np.array([0.2])
    expected = 2 * math.pi ** 2 * 10.0 * math.cos(-0.3 * math.pi) * math.cos(0.2 * math.pi)
    assert forcing(problem, x, y)[0] == pytest.approx(expected)


def test_uniform_coefficient_gives_five_point_laplacian(lap2d):
    a, _ = assemble(ProblemSpec.build("a", 4, epsilon=0.0))
    assert np.allclose(a.toarray(), lap2d(3).toarray())


@pytest.mark.parametrize("kind, epsilon", [("a", 0.0), ("b", 2.0), ("d", 5.0)])
def test_system_is_symmetric_positive_definite(kind, epsilon):
    a, f = assemble(ProblemSpec.build(kind, 8, epsilon=epsilon))
    dense = a.toarray()
    assert a.shape == (49, 49) and f.shape == (49,)
    assert np.allclose(dense, dense.T)
    assert np.linalg.eigvalsh(dense).min() > 0
    assert np.diff(a.indptr).max() <= 5


def test_l2_error_size_mismatch(poisson_problem):
    with pytest.raises(StructuralError):
        l2_error(poisson_problem, np.zeros(3))


def test_l2_error_of_zero_interior():
    problem = ProblemSpec.build("a", 64, epsilon=0.0)
    err = l2_error(problem, np.zeros(problem.mesh.n_interior))
    assert 0.9 < err < 1.0


def test_nodal_exact_is_interior_sample(poisson_problem):
    u = nodal_exact(poisson_problem)
    assert u.shape == (49,)
    # interior node (1, 1) sits at (-0.75, -0.75)
    assert u[0] == pytest.approx(exact_solution(poisson_problem, -0.75, -0.75))


def _observed_order(kind, epsilon):
    errors = []
    for cells in (8, 16, 32, 64):
        problem = ProblemSpec.build(kind, cells, epsilon=epsilon)
        a, f = assemble(problem)
        errors.append(l2_error(problem, spla.spsolve(a.tocsc(), f)))
    return [math.log2(errors[i] / errors[i + 1]) for i in range(len(errors) - 1)]


def test_second_order_l2_convergence():
    assert min(_observed_order("a", 0.0)) >= 1.8


def test_jumping_coefficient_error_decreases():
    assert min(_observed_order("d", 2.0)) >= 1.0
