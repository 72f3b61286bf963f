"""
AMG-preconditioned conjugate gradient and the stationary two-level method,
with residual telemetry and the approximate convergence factor.
"""

from typing import Any, Dict, List, Optional, Sequence, Tuple
import logging
import time

import numpy as np
from pydantic import BaseModel, Field

from amgann.amg.hierarchy import TwoLevelHierarchy, amg_setup, two_level_iteration
from amgann.constants import DEFAULT_N_MAX, DEFAULT_NU1, DEFAULT_NU2, DEFAULT_TOL
from amgann.exceptions import ContractViolation, PreconditionerError, StructuralError
from amgann.linalg.sparse_core import CsrMatrix

logger = logging.getLogger(__name__)


def convergence_factor(residuals: Sequence[float]) -> float:
    """
    rho = (||r_k|| / ||r_0||)^(1/k) at the last index k.

    A single entry gives 0, as does an all-zero history.
    """
    values = [float(r) for r in residuals]
    if not values:
        raise ContractViolation("residual history is empty")
    if len(values) == 1:
        return 0.0
    if values[0] == 0.0:
        if any(v != 0.0 for v in values[1:]):
            raise ContractViolation("initial residual is zero but later residuals are not")
        return 0.0
    k = len(values) - 1
    return (values[-1] / values[0]) ** (1.0 / k)


class SolveReport(BaseModel):
    """Telemetry of one solve; ``elapsed`` is process CPU time of the iteration loop."""
    iterations: int
    residuals: List[float]
    rho: float
    elapsed: float
    converged: bool
    theta: Optional[float] = None
    hierarchy: Optional[Dict[str, Any]] = None
    method: str = "pcg"

    @classmethod
    def from_history(cls, residuals: List[float], elapsed: float, converged: bool,
                     hierarchy: Optional[TwoLevelHierarchy] = None, method: str = "pcg") -> "SolveReport":
        return cls(
            iterations=len(residuals) - 1,
            residuals=residuals,
            rho=convergence_factor(residuals),
            elapsed=elapsed,
            converged=converged,
            theta=hierarchy.theta if hierarchy is not None else None,
            hierarchy=hierarchy.stats() if hierarchy is not None else None,
            method=method,
        )

    @property
    def relative_residual(self) -> float:
        return self.residuals[-1] / self.residuals[0] if self.residuals[0] > 0 else 0.0

    def to_record(self, include_history: bool = False) -> Dict[str, Any]:
        exclude = None if include_history else {"residuals"}
        return self.model_dump(exclude=exclude)


def _check_system(a: CsrMatrix, f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    if a.shape[0] != a.shape[1] or f.shape != (a.shape[0],):
        raise StructuralError(f"system {a.shape} does not match right-hand side {f.shape}")
    return f


def pcg(a: CsrMatrix, f: np.ndarray, hierarchy: TwoLevelHierarchy,
        tol: float = DEFAULT_TOL, n_max: int = DEFAULT_N_MAX) -> Tuple[np.ndarray, SolveReport]:
    """
    Conjugate gradient preconditioned by one two-level iteration from zero.

    Starts from u = 0 and stops at the first k with ||r_k|| < tol ||f|| or
    after ``n_max`` iterations.

    Raises:
        PreconditionerError: r.z <= 0 or d.Ad <= 0 was met, so the
            preconditioned operator is not SPD
    """
    if tol <= 0:
        raise ContractViolation("tolerance must be positive")
    f = _check_system(a, f)
    n = f.shape[0]
    zero = np.zeros(n)

    def precondition(r: np.ndarray) -> np.ndarray:
        return two_level_iteration(hierarchy, zero, r)

    u = np.zeros(n)
    r = f.copy()
    norm_f = float(np.linalg.norm(f))
    residuals = [norm_f]
    threshold = tol * norm_f
    converged = norm_f == 0.0

    start = time.process_time()
    if not converged:
        z = precondition(r)
        rz = float(r @ z)
        if rz <= 0.0:
            raise PreconditionerError(f"r.z = {rz:.3e} at iteration 0")
        d = z.copy()
        for k in range(1, n_max + 1):
            q = a @ d
            dq = float(d @ q)
            if dq <= 0.0:
                raise PreconditionerError(f"d.Ad = {dq:.3e} at iteration {k}")
            alpha = rz / dq
            u += alpha * d
            r -= alpha * q
            norm_r = float(np.linalg.norm(r))
            residuals.append(norm_r)
            if norm_r < threshold:
                converged = True
                break
            z = precondition(r)
            rz_next = float(r @ z)
            if rz_next <= 0.0:
                raise PreconditionerError(f"r.z = {rz_next:.3e} at iteration {k}")
            d = z + (rz_next / rz) * d
            rz = rz_next
    elapsed = time.process_time() - start

    report = SolveReport.from_history(residuals, elapsed, converged, hierarchy)
    if not converged:
        logger.warning(f"PCG did not converge in {n_max} iterations "
                       f"(relative residual {report.relative_residual:.3e})")
    return u, report


def amg_solve(a: CsrMatrix, f: np.ndarray, theta: float, nu1: int = DEFAULT_NU1,
              nu2: int = DEFAULT_NU2, n_max: int = DEFAULT_N_MAX,
              tol: float = DEFAULT_TOL) -> Tuple[np.ndarray, SolveReport]:
    """Stationary two-level method: repeat the two-level iteration from u = 0."""
    f = _check_system(a, f)
    hierarchy = amg_setup(a, theta, nu1, nu2)
    u = np.zeros(f.shape[0])
    norm_f = float(np.linalg.norm(f))
    residuals = [norm_f]
    converged = norm_f == 0.0

    start = time.process_time()
    iteration = 0
    while not converged and iteration < n_max:
        u = two_level_iteration(hierarchy, u, f)
        iteration += 1
        residuals.append(float(np.linalg.norm(f - hierarchy.a @ u)))
        converged = residuals[-1] < tol * norm_f
    elapsed = time.process_time() - start

    report = SolveReport.from_history(residuals, elapsed, converged, hierarchy, method="two-level")
    if not converged:
        logger.warning(f"Two-level iteration did not converge in {n_max} iterations")
    return u, report
