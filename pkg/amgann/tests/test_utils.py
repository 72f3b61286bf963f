import json

import numpy as np
import pytest

from amgann.utils import cells_from_level, level_from_cells, parse_theta_grid, sanitize_json, theta_grid


def test_default_grid():
    grid = theta_grid()
    assert len(grid) == 25
    assert grid[0] == 0.12 and grid[-1] == 0.72
    assert grid[1] == 0.145


def test_parse_range_and_list():
    assert parse_theta_grid("0.1:0.3:3") == [0.1, 0.2, 0.3]
    assert parse_theta_grid("0.5, 0.2,0.3") == [0.2, 0.3, 0.5]
    assert parse_theta_grid([0.7, 0.4]) == [0.4, 0.7]
    assert parse_theta_grid("0.4") == [0.4]
    assert parse_theta_grid(None) == theta_grid()


@pytest.mark.parametrize("value", ["", " , ", "0.0,0.5", "0.5,1.2", "0:0.5:3", "0.1:0.5:0"])
def test_parse_rejects(value):
    with pytest.raises(ValueError):
        parse_theta_grid(value)


def test_levels():
    assert cells_from_level(3) == 8
    assert level_from_cells(1024) == 10
    assert level_from_cells(cells_from_level(7)) == 7
    with pytest.raises(ValueError):
        level_from_cells(12)


def test_sanitize_json():
    data = {1: np.float64(0.5), "a": (np.int32(3), np.bool_(True)), "b": np.arange(3)}
    clean = sanitize_json(data)
    assert clean == {"1": 0.5, "a": [3, True], "b": [0, 1, 2]}
    json.dumps(clean)
