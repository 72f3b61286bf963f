"""
Two-level classical AMG and the preconditioned CG solver.
"""

from .coarsening import CfSplitting, StrongGraph, cf_split, strong_connections
from .interpolation import Interpolation, build_interpolation
from .hierarchy import (
    CoarseSolver, GaussSeidel, TwoLevelHierarchy, amg_setup, smooth, two_level_iteration,
)
from .solver import SolveReport, amg_solve, convergence_factor, pcg

__all__ = [
    'CfSplitting', 'StrongGraph', 'cf_split', 'strong_connections',
    'Interpolation', 'build_interpolation',
    'CoarseSolver', 'GaussSeidel', 'TwoLevelHierarchy', 'amg_setup', 'smooth', 'two_level_iteration',
    'SolveReport', 'amg_solve', 'convergence_factor', 'pcg',
]
