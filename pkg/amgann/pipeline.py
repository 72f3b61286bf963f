"""
Surrogate-driven AMG: pool the system matrix, predict rho over a theta grid,
solve with the minimiser.
"""

from typing import List, Optional, Sequence, Tuple
import logging
import time

import numpy as np
from pydantic import BaseModel

from amgann.amg.hierarchy import amg_setup
from amgann.amg.solver import SolveReport, pcg
from amgann.constants import DEFAULT_N_MAX, DEFAULT_NU1, DEFAULT_NU2, DEFAULT_TOL
from amgann.exceptions import ContractViolation
from amgann.fem.assembly import assemble
from amgann.fem.problem import ProblemSpec
from amgann.linalg.sparse_core import csr_to_coo
from amgann.ml.models.network import SurrogateModel
from amgann.ml.utils.pooling import view_of
from amgann.utils import parse_theta_grid

logger = logging.getLogger(__name__)


class ThetaSelection(BaseModel):
    """Chosen theta, the grid it was picked from and the predictions on it."""
    theta: float
    grid: List[float]
    predicted: List[float]
    overhead: float = 0.0


def select_theta(model: SurrogateModel, view: np.ndarray, log_h: float,
                 grid: Optional[Sequence[float]] = None) -> ThetaSelection:
    """
    Predict rho at every grid theta and return the minimiser.

    Ties go to the smallest theta. The view goes through the convolutional
    stack once; only the dense head is evaluated per grid point.
    """
    grid = parse_theta_grid(grid)
    thetas = np.asarray(grid, dtype=np.float64)
    features = np.repeat(model.features(view), thetas.size, axis=0)
    predicted = model.head_forward(features, log_h, thetas)
    best = int(np.argmin(predicted))
    return ThetaSelection(theta=float(thetas[best]), grid=[float(t) for t in thetas],
                          predicted=[float(p) for p in predicted])


def ann_amg_solve(problem: ProblemSpec, model: Optional[SurrogateModel] = None,
                  grid: Optional[Sequence[float]] = None, nu1: int = DEFAULT_NU1,
                  nu2: int = DEFAULT_NU2, n_max: int = DEFAULT_N_MAX, tol: float = DEFAULT_TOL,
                  theta: Optional[float] = None) -> Tuple[np.ndarray, SolveReport, ThetaSelection]:
    """
    Assemble ``problem``, pick theta with the surrogate and solve with PCG.

    Passing ``theta`` pins it and skips the surrogate. The selection overhead
    (pooling, normalization, predictions) is CPU time and is reported in the
    returned ThetaSelection, separate from the solve time.
    """
    a, f = assemble(problem)
    if theta is not None:
        selection = ThetaSelection(theta=float(theta), grid=[float(theta)], predicted=[])
    elif model is None:
        raise ContractViolation("either a surrogate model or a fixed theta is required")
    else:
        start = time.process_time()
        view = view_of(csr_to_coo(a), model.m, model.mode)
        selection = select_theta(model, view.values, problem.mesh.level, grid)
        selection = selection.model_copy(update={"overhead": time.process_time() - start})
        logger.info(f"Selected theta*={selection.theta:.4f} for {problem.key} "
                    f"(predicted rho {min(selection.predicted):.4f}, overhead {selection.overhead:.3f}s)")

    hierarchy = amg_setup(a, selection.theta, nu1, nu2)
    u, report = pcg(a, f, hierarchy, tol, n_max)
    return u, report, selection
