from __future__ import annotations

import numpy as np
import pytest

from epidiff.dynamics.grid import TimeGrid
from epidiff.utils.errors import DomainError


def test_regular_grid_hits_observation_times(grid):
    assert grid.substeps == 13
    assert grid.n_points == 12 * 14 + 1
    np.testing.assert_allclose(grid.points[grid.obs_index], grid.obs_times)
    np.testing.assert_allclose(grid.deltas.sum(), 84.0)
    assert grid.tn == 84.0


def test_step_is_rounded_to_fit_the_interval():
    grid = TimeGrid.regular(4, 7.0, 3.0)
    assert grid.steps_per_interval == 2
    np.testing.assert_allclose(grid.interval_deltas, 3.5)
    assert TimeGrid.regular(4, 7.0, 7.0).substeps == 0


def test_uneven_intervals_share_substeps():
    grid = TimeGrid.from_delta(0.0, [7.0, 10.0, 17.0], 1.0)
    assert grid.steps_per_interval == 7
    np.testing.assert_allclose(grid.interval_deltas, [1.0, 3.0 / 7.0, 1.0])
    np.testing.assert_allclose(grid.points[grid.interval_slice(1)][[0, -1]], [7.0, 10.0])


def test_interval_and_truncate(grid):
    one = grid.interval(3)
    assert one.t0 == 21.0 and one.n_obs == 1
    assert grid.truncate(5).tn == 35.0


def test_nearest_index(grid):
    assert grid.points[grid.nearest_index(14.2)] == pytest.approx(14.0)
    with pytest.raises(DomainError):
        grid.nearest_index(100.0)


def test_invalid_grids():
    with pytest.raises(DomainError):
        TimeGrid(t0=0.0, obs_times=np.array([7.0, 7.0]), substeps=1)
    with pytest.raises(DomainError):
        TimeGrid(t0=10.0, obs_times=np.array([7.0]), substeps=1)
    with pytest.raises(DomainError):
        TimeGrid.regular(3, 7.0, 0.0)
