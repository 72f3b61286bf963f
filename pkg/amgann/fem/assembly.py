"""
Linear finite element assembly of -div(mu grad u) = f with Dirichlet data.

Each square cell (BL, BR, TR, TL) is split into T1 = (BL, BR, TR) and
T2 = (BL, TR, TL). Both are right triangles with legs 2/N, so their P1
stiffness matrices do not depend on N, and the hypotenuse couplings vanish:
the assembled operator has the 5-point sparsity pattern.

Boundary nodes are eliminated by lifting with the exact solution, so the
returned system has one unknown per interior node, interior node (i, j)
being stored at (i - 1) + (j - 1)(N - 1).
"""

from typing import Tuple
import logging

import numpy as np
import scipy.sparse as sp

from amgann.exceptions import StructuralError
from amgann.fem.problem import ProblemSpec, mu_field
from amgann.linalg.sparse_core import CsrMatrix, canonicalize

logger = logging.getLogger(__name__)

# Reference stiffness (times mu) of the two triangle types, local order as above
_K_LOWER = 0.5 * np.array([[1.0, -1.0, 0.0],
                           [-1.0, 2.0, -1.0],
                           [0.0, -1.0, 1.0]])
_K_UPPER = 0.5 * np.array([[1.0, 0.0, -1.0],
                           [0.0, 1.0, -1.0],
                           [-1.0, -1.0, 2.0]])

# Three interior points, exact for quadratics: barycentric coordinates, equal weights
_QUAD_BARY = np.array([[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
                       [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
                       [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0]])
_QUAD_WEIGHTS = np.full(3, 1.0 / 3.0)


def exact_solution(spec: ProblemSpec, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """u(x, y) = cos(k pi x) cos(k pi y)."""
    k = spec.solution.wave_number
    return np.cos(k * np.pi * np.asarray(xs)) * np.cos(k * np.pi * np.asarray(ys))


def forcing(spec: ProblemSpec, xs: np.ndarray, ys: np.ndarray, mu: np.ndarray = None) -> np.ndarray:
    """
    Tile-wise right-hand side f = -mu Laplace(u) = 2 k^2 pi^2 mu u.

    Pass ``mu`` when the points sit on an element whose coefficient is
    already known (quadrature points may touch an interface).
    """
    k = spec.solution.wave_number
    if mu is None:
        mu = mu_field(spec.pattern, xs, ys)
    return 2.0 * k * k * np.pi ** 2 * mu * exact_solution(spec, xs, ys)


def _triangles(spec: ProblemSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    Node triples of every triangle and a flag marking the upper (T2) ones.

    Triangles are ordered cell by cell (row-major over cells), T1 before T2.
    """
    n = spec.mesh.cells_per_side
    n1 = n + 1
    ci, cj = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    ci, cj = ci.ravel(), cj.ravel()
    bl = cj * n1 + ci
    br = bl + 1
    tl = bl + n1
    tr = tl + 1
    lower = np.stack([bl, br, tr], axis=1)
    upper = np.stack([bl, tr, tl], axis=1)
    tris = np.empty((2 * n * n, 3), dtype=np.int64)
    tris[0::2] = lower
    tris[1::2] = upper
    is_upper = np.zeros(2 * n * n, dtype=bool)
    is_upper[1::2] = True
    return tris, is_upper


def _element_geometry(spec: ProblemSpec):
    tris, is_upper = _triangles(spec)
    node_x, node_y = spec.mesh.node_xy()
    vx, vy = node_x[tris], node_y[tris]
    mu = mu_field(spec.pattern, vx.mean(axis=1), vy.mean(axis=1))
    area = 0.5 * spec.mesh.spacing ** 2
    return tris, is_upper, vx, vy, mu, area


def _full_system(spec: ProblemSpec) -> Tuple[CsrMatrix, np.ndarray]:
    tris, is_upper, vx, vy, mu, area = _element_geometry(spec)

    local = np.where(is_upper[:, None, None], _K_UPPER, _K_LOWER) * mu[:, None, None]
    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    n_nodes = spec.mesh.n_nodes
    a_full = canonicalize(sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n_nodes, n_nodes)))

    qx = vx @ _QUAD_BARY.T
    qy = vy @ _QUAD_BARY.T
    fq = forcing(spec, qx, qy, mu=np.repeat(mu[:, None], 3, axis=1))
    # load_e[a] = area * sum_q w_q f(x_q) phi_a(x_q)
    load = area * (fq * _QUAD_WEIGHTS) @ _QUAD_BARY
    b_full = np.bincount(tris.ravel(), weights=load.ravel(), minlength=n_nodes)
    return a_full, b_full


def assemble(spec: ProblemSpec) -> Tuple[CsrMatrix, np.ndarray]:
    """
    Assemble the interior system A_h u = f_h of a problem.

    Args:
        spec: Problem definition

    Returns:
        Tuple[CsrMatrix, np.ndarray]: SPD matrix over interior nodes and the
        right-hand side including the Dirichlet lifting term
    """
    a_full, b_full = _full_system(spec)
    interior = spec.mesh.interior_mask()
    boundary = ~interior
    node_x, node_y = spec.mesh.node_xy()
    g = exact_solution(spec, node_x[boundary], node_y[boundary])

    a_ii = canonicalize(a_full[interior][:, interior])
    a_ib = a_full[interior][:, boundary]
    f = b_full[interior] - a_ib @ g
    logger.debug(f"Assembled {spec.pattern.kind.value} N={spec.mesh.cells_per_side}: "
                 f"n={a_ii.shape[0]}, nnz={a_ii.nnz}")
    return a_ii, f


def nodal_exact(spec: ProblemSpec) -> np.ndarray:
    """Exact solution sampled at the interior nodes."""
    node_x, node_y = spec.mesh.node_xy()
    interior = spec.mesh.interior_mask()
    return exact_solution(spec, node_x[interior], node_y[interior])


def l2_error(spec: ProblemSpec, u_h: np.ndarray) -> float:
    """
    L2 norm of u - u_h, u_h being the P1 function with the given interior
    values and exact boundary values, integrated with the 3-point rule.
    """
    u_h = np.asarray(u_h, dtype=np.float64)
    if u_h.shape != (spec.mesh.n_interior,):
        raise StructuralError(f"expected {spec.mesh.n_interior} interior values, got {u_h.shape}")

    node_x, node_y = spec.mesh.node_xy()
    interior = spec.mesh.interior_mask()
    nodal = exact_solution(spec, node_x, node_y)
    nodal[interior] = u_h

    tris, _ = _triangles(spec)
    vx, vy = node_x[tris], node_y[tris]
    qx = vx @ _QUAD_BARY.T
    qy = vy @ _QUAD_BARY.T
    uh_q = nodal[tris] @ _QUAD_BARY.T
    diff = exact_solution(spec, qx, qy) - uh_q
    area = 0.5 * spec.mesh.spacing ** 2
    return float(np.sqrt(area * np.sum(diff ** 2 @ _QUAD_WEIGHTS)))
