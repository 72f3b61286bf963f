"""
Domain errors raised across the pipeline.

Library code raises these and never exits; `amgann.main` turns any
`AmgAnnError` into exit code 1.
"""

from typing import Optional


class AmgAnnError(Exception):
    """Base class for every domain error of the package."""


class StructuralError(AmgAnnError, ValueError):
    """Index out of bounds, dimension or length mismatch."""


class SingularMatrixError(AmgAnnError, ArithmeticError):
    """A pivot fell below the singularity threshold."""


class ContractViolation(AmgAnnError, ValueError):
    """The caller broke a documented precondition."""


class InterpolationError(AmgAnnError, RuntimeError):
    """An F-point has strong connections but none of them is a C-point."""

    def __init__(self, point: int, message: Optional[str] = None):
        self.point = point
        super().__init__(message or f"F-point {point} has no interpolatory C-points")


class PreconditionerError(AmgAnnError, RuntimeError):
    """The preconditioned residual is not positive (M^-1 is not SPD)."""


class DegenerateInputError(AmgAnnError, ValueError):
    """A view cannot be normalized (constant or all-zero)."""


class CorpusFormatError(AmgAnnError, ValueError):
    """A corpus file frame is malformed."""


class ModelFormatError(AmgAnnError, ValueError):
    """A model file is malformed or of an unknown version."""
