"""
Problem definitions for the diffusion model problem on Omega = (-1, 1)^2.

A ProblemSpec couples a structured mesh with one of four piecewise-constant
diffusion patterns and the manufactured solution that goes with it:
patterns (a) and (b) use cos(pi x) cos(pi y), patterns (c) and (d) use
cos(2 pi x) cos(2 pi y).
"""

from enum import Enum
from typing import Any, Dict, Optional, Tuple
import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from amgann.exceptions import ContractViolation

logger = logging.getLogger(__name__)

INTERFACE_TOLERANCE = 1e-12


class PatternKind(str, Enum):
    """Tile layouts of the diffusion coefficient."""
    TWO_STRIDES = "a"
    CHECKERBOARD_2X2 = "b"
    FOUR_STRIDES = "c"
    CHECKERBOARD_4X4 = "d"

    @property
    def tile_width(self) -> float:
        return 1.0 if self in (PatternKind.TWO_STRIDES, PatternKind.CHECKERBOARD_2X2) else 0.5

    @property
    def is_stride(self) -> bool:
        return self in (PatternKind.TWO_STRIDES, PatternKind.FOUR_STRIDES)


class ExactSolution(str, Enum):
    COS_PI = "cos-pi"
    COS_2PI = "cos-2pi"

    @property
    def wave_number(self) -> int:
        return 1 if self is ExactSolution.COS_PI else 2

    @classmethod
    def for_pattern(cls, kind: PatternKind) -> "ExactSolution":
        return cls.COS_PI if kind.tile_width == 1.0 else cls.COS_2PI


class StructuredMesh(BaseModel):
    """
    Uniform cartesian mesh of Omega with N cells per side, each cell split
    into two triangles along its bottom-left to top-right diagonal.

    The element side is 2/N; the nominal mesh size is h = 1/N = 2^-k.
    """
    model_config = ConfigDict(frozen=True)

    cells_per_side: int

    @field_validator("cells_per_side")
    @classmethod
    def _power_of_two(cls, value: int) -> int:
        if value < 2 or value & (value - 1):
            raise ValueError(f"cells_per_side must be a power of two >= 2, got {value}")
        return value

    @property
    def h(self) -> float:
        return 1.0 / self.cells_per_side

    @property
    def level(self) -> int:
        """k with h = 2^-k, the -log2(h) network input."""
        return int(math.log2(self.cells_per_side))

    @property
    def spacing(self) -> float:
        return 2.0 / self.cells_per_side

    @property
    def n_nodes(self) -> int:
        return (self.cells_per_side + 1) ** 2

    @property
    def n_interior(self) -> int:
        return (self.cells_per_side - 1) ** 2

    def coordinates(self) -> np.ndarray:
        """Grid line positions -1, -1 + 2/N, ..., 1."""
        return np.linspace(-1.0, 1.0, self.cells_per_side + 1)

    def node_xy(self) -> Tuple[np.ndarray, np.ndarray]:
        """x and y of every node, node (i, j) stored at j (N + 1) + i."""
        line = self.coordinates()
        xx, yy = np.meshgrid(line, line, indexing="xy")
        return xx.ravel(), yy.ravel()

    def interior_mask(self) -> np.ndarray:
        n1 = self.cells_per_side + 1
        i = np.tile(np.arange(n1), n1)
        j = np.repeat(np.arange(n1), n1)
        return (i > 0) & (i < n1 - 1) & (j > 0) & (j < n1 - 1)


class DiffusionPattern(BaseModel):
    """
    Piecewise-constant diffusion coefficient.

    With a single exponent, white tiles carry 10^epsilon and gray tiles 1.
    With a pair (eps1, eps2), white tiles carry 10^eps1 and gray tiles 10^eps2.
    """
    model_config = ConfigDict(frozen=True)

    kind: PatternKind
    epsilon: Optional[float] = None
    epsilons: Optional[Tuple[float, float]] = None

    @model_validator(mode="after")
    def _one_exponent_form(self) -> "DiffusionPattern":
        if (self.epsilon is None) == (self.epsilons is None):
            raise ValueError("give exactly one of epsilon or epsilons")
        return self

    @property
    def white_value(self) -> float:
        exponent = self.epsilon if self.epsilon is not None else self.epsilons[0]
        return 10.0 ** exponent

    @property
    def gray_value(self) -> float:
        return 1.0 if self.epsilon is not None else 10.0 ** self.epsilons[1]

    @property
    def exponents(self) -> Tuple[float, ...]:
        return (self.epsilon,) if self.epsilon is not None else tuple(self.epsilons)

    def tile_indices(self, xs: np.ndarray, ys: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        width = self.kind.tile_width
        n_tiles = int(round(2.0 / width))
        ix = np.clip(np.floor((np.asarray(xs, dtype=np.float64) + 1.0) / width), 0, n_tiles - 1)
        iy = np.clip(np.floor((np.asarray(ys, dtype=np.float64) + 1.0) / width), 0, n_tiles - 1)
        return ix.astype(np.int64), iy.astype(np.int64)

    def is_gray(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        ix, iy = self.tile_indices(xs, ys)
        if self.kind.is_stride:
            return ix % 2 == 1
        return (ix + iy) % 2 == 0

    def on_interface(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """True where a point lies on an interior tile boundary."""
        width = self.kind.tile_width

        def _on_line(t: np.ndarray) -> np.ndarray:
            scaled = (np.asarray(t, dtype=np.float64) + 1.0) / width
            near = np.abs(scaled - np.round(scaled)) < INTERFACE_TOLERANCE
            interior = (scaled > INTERFACE_TOLERANCE) & (scaled < 2.0 / width - INTERFACE_TOLERANCE)
            return near & interior

        if self.kind.is_stride:
            return _on_line(xs)
        return _on_line(xs) | _on_line(ys)


def mu_field(pattern: DiffusionPattern, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorised diffusion coefficient over arrays of points off the interfaces."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if np.any(pattern.on_interface(xs, ys)):
        raise ContractViolation("diffusion coefficient evaluated on a tile interface")
    return np.where(pattern.is_gray(xs, ys), pattern.gray_value, pattern.white_value)


def mu_eval(pattern: DiffusionPattern, x: float, y: float) -> float:
    """Diffusion coefficient at a single point of the closed domain."""
    if not (-1.0 <= x <= 1.0 and -1.0 <= y <= 1.0):
        raise ContractViolation(f"point ({x}, {y}) outside the closed domain")
    return float(mu_field(pattern, np.array([x]), np.array([y]))[0])


class ProblemSpec(BaseModel):
    """Mesh, diffusion pattern and manufactured solution of one test case."""
    model_config = ConfigDict(frozen=True)

    mesh: StructuredMesh
    pattern: DiffusionPattern
    solution: Optional[ExactSolution] = None

    @model_validator(mode="after")
    def _check_pairing(self) -> "ProblemSpec":
        expected = ExactSolution.for_pattern(self.pattern.kind)
        if self.solution is None:
            object.__setattr__(self, "solution", expected)
        elif self.solution is not expected:
            raise ValueError(f"pattern {self.pattern.kind.value} pairs with {expected.value}, "
                             f"not {self.solution.value}")
        width = self.pattern.kind.tile_width
        if self.mesh.spacing > width:
            raise ValueError(f"pattern {self.pattern.kind.value} needs at least "
                             f"{int(round(2.0 / width))} cells per side")
        return self

    @classmethod
    def build(cls, kind: str, cells: int, epsilon: Optional[float] = None,
              epsilons: Optional[Tuple[float, float]] = None) -> "ProblemSpec":
        pattern = DiffusionPattern(kind=PatternKind(kind), epsilon=epsilon, epsilons=epsilons)
        return cls(mesh=StructuredMesh(cells_per_side=cells), pattern=pattern)

    @property
    def key(self) -> Tuple[Any, ...]:
        """(pattern, exponents, N): the test case this problem belongs to."""
        return (self.pattern.kind.value, self.pattern.exponents, self.mesh.cells_per_side)

    def to_record(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {"pattern": self.pattern.kind.value}
        if self.pattern.epsilon is not None:
            record["epsilon"] = self.pattern.epsilon
        else:
            record["epsilons"] = list(self.pattern.epsilons)
        record["N"] = self.mesh.cells_per_side
        record["solution"] = self.solution.value
        return record

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> "ProblemSpec":
        epsilons = record.get("epsilons")
        pattern = DiffusionPattern(
            kind=PatternKind(record["pattern"]),
            epsilon=record.get("epsilon"),
            epsilons=tuple(epsilons) if epsilons is not None else None,
        )
        solution = record.get("solution")
        return cls(
            mesh=StructuredMesh(cells_per_side=int(record["N"])),
            pattern=pattern,
            solution=ExactSolution(solution) if solution is not None else None,
        )
