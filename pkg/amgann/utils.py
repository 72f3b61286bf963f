"""
Utility functions used across the package.
"""
from typing import Any, List, Sequence, Union
import logging
import math

import numpy as np

from amgann.constants import THETA_GRID_POINTS, THETA_MAX, THETA_MIN

logger = logging.getLogger(__name__)


def theta_grid(lo: float = THETA_MIN, hi: float = THETA_MAX,
               count: int = THETA_GRID_POINTS) -> List[float]:
    """
    Equally spaced strong-threshold values on [lo, hi].

    Values are rounded to 12 digits so grids built in different places
    compare equal.
    """
    if count < 1:
        raise ValueError("theta grid needs at least one point")
    if count == 1:
        return [round(float(lo), 12)]
    return [round(float(v), 12) for v in np.linspace(lo, hi, count)]


def parse_theta_grid(value: Union[str, Sequence[float], None]) -> List[float]:
    """
    Parse a theta grid given as "lo:hi:count", a comma list, or a sequence.

    Args:
        value: Grid description; None gives the default training grid

    Returns:
        List[float]: Sorted grid, every value in (0, 1]
    """
    if value is None:
        return theta_grid()
    if isinstance(value, str):
        text = value.strip()
        if ":" in text:
            lo, hi, count = text.split(":")
            grid = theta_grid(float(lo), float(hi), int(count))
        else:
            grid = [float(part) for part in text.split(",") if part.strip()]
    else:
        grid = [float(v) for v in value]
    if not grid:
        raise ValueError("theta grid is empty")
    bad = [t for t in grid if not 0.0 < t <= 1.0]
    if bad:
        raise ValueError(f"theta values outside (0, 1]: {bad}")
    return sorted(grid)


def cells_from_level(level: int) -> int:
    """Cells per side N = 2^k for mesh level k (h = 2^-k)."""
    return 2 ** int(level)


def level_from_cells(cells: int) -> int:
    """Inverse of cells_from_level; N must be a power of two."""
    level = int(round(math.log2(cells)))
    if 2 ** level != cells:
        raise ValueError(f"{cells} is not a power of two")
    return level


def sanitize_json(data: Any) -> Any:
    """
    Recursively convert numpy scalars/arrays into plain JSON types.

    Args:
        data: Any nested structure of dicts, lists, tuples and numbers

    Returns:
        Any: The same structure with only JSON-native values
    """
    if isinstance(data, dict):
        return {str(k): sanitize_json(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [sanitize_json(v) for v in data]
    if isinstance(data, np.ndarray):
        return sanitize_json(data.tolist())
    if isinstance(data, np.bool_):
        return bool(data)
    if isinstance(data, np.integer):
        return int(data)
    if isinstance(data, np.floating):
        return float(data)
    return data
