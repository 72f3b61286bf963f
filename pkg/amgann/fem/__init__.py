"""
Model problem definitions and linear finite element assembly.
"""

from .problem import (
    DiffusionPattern, ExactSolution, PatternKind, ProblemSpec, StructuredMesh,
    mu_eval, mu_field,
)
from .assembly import assemble, exact_solution, forcing, l2_error, nodal_exact

__all__ = [
    'DiffusionPattern', 'ExactSolution', 'PatternKind', 'ProblemSpec', 'StructuredMesh',
    'mu_eval', 'mu_field', 'assemble', 'exact_solution', 'forcing', 'l2_error', 'nodal_exact',
]
