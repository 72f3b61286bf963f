"""
Generation of the training corpora and the CPU-time benchmark.

Dataset 1 sweeps 4 patterns x 12 exponents x mesh levels x 25 thetas with
the single-exponent coefficient; dataset 2 sweeps 4 patterns x 9 exponent
pairs x mesh levels x 18 thetas with the two-exponent coefficient. Each
problem is assembled and pooled once; every theta then gets its own setup
and solve.
"""

from itertools import product
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union
import logging

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from amgann.amg.hierarchy import amg_setup
from amgann.amg.solver import pcg
from amgann.constants import (
    DATASET1_EPSILONS, DATASET2_EXPONENTS, DATASET2_THETA_POINTS, DEFAULT_N_MAX, DEFAULT_NU1,
    DEFAULT_NU2, DEFAULT_TOL, DESK_MAX_LEVEL, MESH_LEVELS, REPETITION_SCHEDULE, THETA_MAX,
    THETA_MIN, THREADS, VIEW_SIZE,
)
from amgann.dataset.corpus import CorpusWriter, Sample, SampleRecord, completed_keys
from amgann.exceptions import ContractViolation, PreconditionerError
from amgann.fem.assembly import assemble
from amgann.fem.problem import PatternKind, ProblemSpec
from amgann.linalg.sparse_core import csr_to_coo
from amgann.ml.utils.pooling import pooling
from amgann.utils import cells_from_level, theta_grid

logger = logging.getLogger(__name__)

PATTERNS = [kind.value for kind in PatternKind]


def mesh_levels(full: bool = False, m: int = VIEW_SIZE) -> List[int]:
    """
    Mesh levels whose matrices admit an m x m view, i.e. (2^k - 1)^2 >= m.

    k runs up to 10 with ``full`` and up to the desk limit otherwise.
    """
    top = max(MESH_LEVELS) if full else DESK_MAX_LEVEL
    return [k for k in MESH_LEVELS if k <= top and (cells_from_level(k) - 1) ** 2 >= m]


def _check_levels(levels: Sequence[int], m: int) -> List[int]:
    levels = list(levels)
    small = [k for k in levels if (cells_from_level(k) - 1) ** 2 < m]
    if small:
        raise ContractViolation(f"mesh levels {small} have fewer than m={m} unknowns; "
                                f"lower --m or drop those levels")
    return levels


def repetitions_for(level: int) -> int:
    """Timing repetitions for mesh level k, clamped to the schedule's ends."""
    levels = sorted(REPETITION_SCHEDULE)
    level = min(max(int(level), levels[0]), levels[-1])
    return REPETITION_SCHEDULE[level]


def dataset1_problems(levels: Sequence[int]) -> List[ProblemSpec]:
    return [ProblemSpec.build(kind, cells_from_level(k), epsilon=eps)
            for kind, eps, k in product(PATTERNS, DATASET1_EPSILONS, levels)]


def dataset2_problems(levels: Sequence[int]) -> List[ProblemSpec]:
    pairs = list(product(DATASET2_EXPONENTS, DATASET2_EXPONENTS))
    return [ProblemSpec.build(kind, cells_from_level(k), epsilons=pair)
            for kind, pair, k in product(PATTERNS, pairs, levels)]


def timing_benchmark(problem: ProblemSpec, thetas: Sequence[float],
                     repetitions: Optional[int] = None, nu1: int = DEFAULT_NU1,
                     nu2: int = DEFAULT_NU2, tol: float = DEFAULT_TOL,
                     n_max: int = DEFAULT_N_MAX) -> List[Dict[str, float]]:
    """
    CPU time of the preconditioned solve for each theta.

    The hierarchy is built once per theta; one untimed solve warms up and
    provides rho, then ``repetitions`` solves are timed (setup excluded).
    Runs serially.
    """
    a, f = assemble(problem)
    reps = repetitions if repetitions is not None else repetitions_for(problem.mesh.level)
    results = []
    for theta in thetas:
        hierarchy = amg_setup(a, theta, nu1, nu2)
        report, times = _timed_solves(a, f, hierarchy, reps, tol, n_max)
        results.append({
            "theta": float(theta),
            "rho": report.rho,
            "iterations": report.iterations,
            "converged": report.converged,
            **_timing_summary(times),
            "repetitions": int(reps),
        })
    return results


def _timed_solves(a, f, hierarchy, reps: int, tol: float, n_max: int):
    _, report = pcg(a, f, hierarchy, tol, n_max)
    times = np.array([pcg(a, f, hierarchy, tol, n_max)[1].elapsed for _ in range(reps)])
    return report, times


def _timing_summary(times: np.ndarray) -> Dict[str, float]:
    if times.size == 0:
        return {"mean": 0.0, "std": 0.0, "min": 0.0, "max": 0.0}
    return {"mean": float(times.mean()), "std": float(times.std()),
            "min": float(times.min()), "max": float(times.max())}


def solve_problem(problem: ProblemSpec, thetas: Sequence[float], dataset: str,
                  m: int = VIEW_SIZE, timing: bool = True, nu1: int = DEFAULT_NU1,
                  nu2: int = DEFAULT_NU2, tol: float = DEFAULT_TOL,
                  n_max: int = DEFAULT_N_MAX) -> List[Sample]:
    """All samples of one problem, one per theta."""
    a, f = assemble(problem)
    view = pooling(csr_to_coo(a), m)
    base = problem.to_record()
    reps = repetitions_for(problem.mesh.level) if timing else 0
    samples = []
    for theta in thetas:
        hierarchy = amg_setup(a, theta, nu1, nu2)
        try:
            report, times = _timed_solves(a, f, hierarchy, reps, tol, n_max)
            rho, iterations, converged, done_reps = report.rho, report.iterations, report.converged, reps
        except PreconditionerError as e:
            # kept as a non-contracting run
            logger.warning(f"{problem.key} theta={theta:.4f}: {e}")
            times = np.empty(0)
            rho, iterations, converged, done_reps = 1.0, n_max, False, 0
        timing_stats = _timing_summary(times)
        record = SampleRecord(
            dataset=dataset,
            neg_log2_h=problem.mesh.level,
            theta=float(theta),
            rho=rho,
            iterations=iterations,
            converged=converged,
            n=hierarchy.n,
            n_coarse=hierarchy.n_coarse,
            m=m,
            elapsed_mean=timing_stats["mean"],
            elapsed_std=timing_stats["std"],
            repetitions=done_reps,
            **base,
        )
        samples.append(Sample(record=record, view=view))
    return samples


def _pending(problems: Sequence[ProblemSpec], thetas: Sequence[float],
             done: Set[tuple]) -> List[Tuple[ProblemSpec, List[float]]]:
    jobs = []
    for problem in problems:
        todo = [t for t in thetas if problem.key + (round(t, 12),) not in done]
        if todo:
            jobs.append((problem, todo))
    return jobs


def generate(out: Union[str, Path], problems: Sequence[ProblemSpec], thetas: Sequence[float],
             dataset: str, m: int = VIEW_SIZE, timing: bool = True,
             n_jobs: Optional[int] = None) -> int:
    """
    Solve every (problem, theta) not yet in ``out`` and append it.

    Problems are processed in order and frames are written in that order,
    so an interrupted run resumed later ends with the same corpus.
    Timed runs are serial.

    Returns:
        int: Number of samples appended
    """
    out = Path(out)
    done = completed_keys(out)
    jobs = _pending(problems, thetas, done)
    total = len(problems) * len(thetas)
    logger.info(f"{dataset}: {total} samples in grid, {len(done)} already in {out}, "
                f"{sum(len(t) for _, t in jobs)} to solve")
    workers = 1 if timing else (n_jobs or THREADS)

    with CorpusWriter(out) as writer:
        if workers == 1:
            results: Iterator[List[Sample]] = (solve_problem(p, t, dataset, m, timing) for p, t in jobs)
        else:
            results = Parallel(n_jobs=workers, return_as="generator")(
                delayed(solve_problem)(p, t, dataset, m, timing) for p, t in jobs)
        for samples in tqdm(results, total=len(jobs), desc=f"Generating {dataset}"):
            writer.write_all(samples)
            not_converged = [s.record.theta for s in samples if not s.record.converged]
            if not_converged:
                logger.warning(f"{samples[0].record.case_key}: no convergence for theta {not_converged}")
    logger.info(f"{dataset}: appended {writer.written} samples to {out}")
    return writer.written


def generate_dataset1(out: Union[str, Path], full: bool = False,
                      thetas: Optional[Sequence[float]] = None,
                      levels: Optional[Sequence[int]] = None, **kwargs) -> int:
    thetas = list(thetas) if thetas is not None else theta_grid()
    m = kwargs.get("m", VIEW_SIZE)
    levels = _check_levels(levels, m) if levels is not None else mesh_levels(full, m)
    return generate(out, dataset1_problems(levels), thetas, "ds1", **kwargs)


def generate_dataset2(out: Union[str, Path], full: bool = False,
                      thetas: Optional[Sequence[float]] = None,
                      levels: Optional[Sequence[int]] = None, **kwargs) -> int:
    thetas = list(thetas) if thetas is not None else theta_grid(THETA_MIN, THETA_MAX, DATASET2_THETA_POINTS)
    m = kwargs.get("m", VIEW_SIZE)
    levels = _check_levels(levels, m) if levels is not None else mesh_levels(full, m)
    return generate(out, dataset2_problems(levels), thetas, "ds2", **kwargs)
