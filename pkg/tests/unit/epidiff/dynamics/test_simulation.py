from __future__ import annotations

import numpy as np

from epidiff.dynamics.grid import TimeGrid
from epidiff.dynamics.simulation import simulate_epidemic


def test_same_seed_same_epidemic(params, grid):
    a = simulate_epidemic(params, grid, "bm", 7)
    b = simulate_epidemic(params, grid, "bm", 7)
    np.testing.assert_array_equal(a.data.values, b.data.values)
    np.testing.assert_array_equal(a.path.x, b.path.x)
    assert not np.array_equal(a.data.values, simulate_epidemic(params, grid, "bm", 8).data.values)


def test_noiseless_data_is_incidence(params, grid):
    epi = simulate_epidemic(params, grid, "bm", 1, tau=0.0)
    np.testing.assert_allclose(epi.data.values, epi.trajectory.incidence)
    np.testing.assert_allclose(epi.data.times, grid.obs_times)


def test_reporting_factor_scales_cases(params, grid):
    full = simulate_epidemic(params, grid, "bm", 1, tau=0.0)
    tenth = simulate_epidemic(params, grid, "bm", 1, tau=0.0, c=0.1)
    np.testing.assert_allclose(tenth.data.values, 0.1 * full.data.values)


def test_log_residuals_have_sd_tau(params):
    grid = TimeGrid.regular(40, 7.0, 0.5)
    epi = simulate_epidemic(params.replace(sigma=[0.0], beta0=[1.0]), grid, "bm", 3, tau=0.3)
    resid = np.log(epi.data.values) - np.log(epi.trajectory.incidence)
    assert 0.2 < resid.std() < 0.4


def test_epidemic_fixture_has_cases(epidemic):
    incidence = epidemic.trajectory.incidence[:, 0]
    assert np.all(incidence > 0)
    assert epidemic.data.n_obs == 12
