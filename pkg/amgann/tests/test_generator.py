import numpy as np
import pytest

from amgann.amg.coarsening import cf_split, strong_connections
from amgann.constants import DATASET1_EPSILONS, DATASET2_THETA_POINTS, THETA_MAX, THETA_MIN, VIEW_SIZE
from amgann.dataset import generator
from amgann.dataset.corpus import read_corpus
from amgann.dataset.generator import (
    dataset1_problems, dataset2_problems, generate, generate_dataset1, mesh_levels, repetitions_for,
    solve_problem, timing_benchmark,
)
from amgann.exceptions import ContractViolation, PreconditionerError
from amgann.fem.assembly import assemble
from amgann.fem.problem import ProblemSpec
from amgann.utils import theta_grid


def test_mesh_levels():
    assert mesh_levels() == [4, 5, 6, 7]
    assert mesh_levels(full=True) == list(range(4, 11))
    assert mesh_levels(m=4) == [3, 4, 5, 6, 7]
    assert mesh_levels(full=True, m=4) == list(range(3, 11))


def test_default_levels_admit_default_view():
    for k in mesh_levels(full=True):
        assert (2 ** k - 1) ** 2 >= VIEW_SIZE


@pytest.mark.parametrize("level, reps", [(2, 200), (3, 200), (6, 20), (10, 4), (12, 4)])
def test_repetition_schedule(level, reps):
    assert repetitions_for(level) == reps


def test_problem_grids():
    ds1 = dataset1_problems([3, 4])
    assert len(ds1) == 4 * len(DATASET1_EPSILONS) * 2
    assert len({p.key for p in ds1}) == len(ds1)
    ds2 = dataset2_problems([3])
    assert len(ds2) == 4 * 9
    assert all(p.pattern.epsilons is not None for p in ds2)


def test_solve_problem_records(poisson_problem):
    samples = solve_problem(poisson_problem, [0.24, 0.48], "ds1", m=5, timing=False)
    assert [s.record.theta for s in samples] == [0.24, 0.48]
    for sample in samples:
        record = sample.record
        assert record.n == 49 and record.m == 5 and record.neg_log2_h == 3
        assert record.converged and 0.0 <= record.rho < 1.0
        assert record.repetitions == 0 and record.elapsed_mean == 0.0
        assert sample.view.m == 5 and sample.view.c.sum() > 0
    assert samples[0].view is samples[1].view


def test_timing_benchmark(poisson_problem):
    rows = timing_benchmark(poisson_problem, [0.3, 0.6], repetitions=3)
    assert [row["theta"] for row in rows] == [0.3, 0.6]
    for row in rows:
        assert row["repetitions"] == 3
        assert 0.0 <= row["min"] <= row["mean"] <= row["max"]


def test_generate_resumes_and_is_reproducible(tmp_path):
    problems = [ProblemSpec.build("a", 8, epsilon=0.0), ProblemSpec.build("d", 8, epsilon=2.0)]
    thetas = [0.24, 0.5]
    first = tmp_path / "first.amgs"
    assert generate(first, problems[:1], thetas, "ds1", m=4, timing=False) == 2
    assert generate(first, problems, thetas, "ds1", m=4, timing=False) == 2
    assert generate(first, problems, thetas, "ds1", m=4, timing=False) == 0

    second = tmp_path / "second.amgs"
    generate(second, problems, thetas, "ds1", m=4, timing=False)
    assert first.read_bytes() == second.read_bytes()
    assert len(read_corpus(first)) == 4


def test_parallel_generation_matches_serial(tmp_path):
    problems = [ProblemSpec.build(kind, 8, epsilon=1.2) for kind in ("a", "b", "c")]
    generate(tmp_path / "serial.amgs", problems, [0.3], "ds1", m=4, timing=False, n_jobs=1)
    generate(tmp_path / "parallel.amgs", problems, [0.3], "ds1", m=4, timing=False, n_jobs=2)
    assert (tmp_path / "serial.amgs").read_bytes() == (tmp_path / "parallel.amgs").read_bytes()


def test_generate_dataset1_small(tmp_path):
    path = tmp_path / "ds1.amgs"
    written = generate_dataset1(path, thetas=[0.36], levels=[3], m=4, timing=False)
    assert written == 4 * len(DATASET1_EPSILONS)
    assert {s.record.dataset for s in read_corpus(path)} == {"ds1"}


def test_generate_dataset1_with_defaults(tmp_path, monkeypatch):
    monkeypatch.setattr(generator, "DESK_MAX_LEVEL", 4)
    path = tmp_path / "ds1.amgs"
    written = generate_dataset1(path, thetas=[0.36], timing=False)
    assert written == 4 * len(DATASET1_EPSILONS)
    records = [s.record for s in read_corpus(path)]
    assert {r.m for r in records} == {VIEW_SIZE}
    assert {r.neg_log2_h for r in records} == {4}


def test_level_too_small_for_view_rejected(tmp_path):
    path = tmp_path / "ds1.amgs"
    with pytest.raises(ContractViolation, match=r"\[3\]"):
        generate_dataset1(path, thetas=[0.36], levels=[3, 4], timing=False)
    assert not path.exists()


def test_preconditioner_failure_is_recorded(tmp_path, monkeypatch):
    def failing_pcg(*args, **kwargs):
        raise PreconditionerError("r.z = -1.000e+00 at iteration 3")

    monkeypatch.setattr(generator, "pcg", failing_pcg)
    problems = [ProblemSpec.build("d", 8, epsilon=9.5)]
    assert generate(tmp_path / "ds1.amgs", problems, [0.24, 0.5], "ds1", m=4, timing=False) == 2
    records = [s.record for s in read_corpus(tmp_path / "ds1.amgs")]
    assert [r.theta for r in records] == [0.24, 0.5]
    for record in records:
        assert not record.converged
        assert record.rho == 1.0 and record.repetitions == 0


def test_equal_exponent_pairs_share_uniform_graph():
    thetas = theta_grid(THETA_MIN, THETA_MAX, DATASET2_THETA_POINTS)
    equal_pairs = [p for p in dataset2_problems([3]) if p.pattern.epsilons[0] == p.pattern.epsilons[1]]
    assert len(equal_pairs) == 4 * 3
    for problem in equal_pairs:
        a, _ = assemble(problem)
        uniform, _ = assemble(ProblemSpec.build(problem.pattern.kind.value, 8, epsilon=0.0))
        for theta in thetas:
            g, g_uniform = strong_connections(a, theta), strong_connections(uniform, theta)
            assert (g.s != g_uniform.s).nnz == 0
            assert np.array_equal(cf_split(g).is_coarse, cf_split(g_uniform).is_coarse)
