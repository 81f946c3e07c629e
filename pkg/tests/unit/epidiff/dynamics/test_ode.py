from __future__ import annotations

import numpy as np
import pytest

from epidiff.dynamics.drivers import LatentPath
from epidiff.dynamics.drivers import simulate_driver
from epidiff.dynamics.grid import TimeGrid
from epidiff.dynamics.ode import propagate_ode
from epidiff.utils.errors import DomainError
from epidiff.utils.errors import IntegrationError


def test_population_is_conserved(params, grid):
    path = simulate_driver("bm", params, grid, 0)
    traj = propagate_ode(params.initial_compartments(), path, params)
    totals = traj.compartments.sum(axis=2)
    np.testing.assert_allclose(totals, 1e6, atol=1e-9 * 1e6)
    assert traj.compartments.shape == (grid.n_points, 1, 4)
    assert np.all(traj.compartments >= 0)


def test_incidence_matches_recovered_flow(params, grid):
    path = simulate_driver("bm", params.replace(sigma=[0.0]), grid, 0)
    traj = propagate_ode(params.initial_compartments(), path, params)
    # whoever left E this week is in I or R by its end
    i_plus_r = traj.I[grid.obs_index, 0] + traj.R[grid.obs_index, 0]
    start = traj.I[0, 0] + traj.R[0, 0]
    np.testing.assert_allclose(traj.incidence[:, 0].cumsum(), i_plus_r - start, rtol=1e-9)


def test_constant_contact_rate_matches_hand_step(params):
    grid = TimeGrid(t0=0.0, obs_times=np.array([1.0]), substeps=0)
    path = LatentPath(grid=grid, x=np.full(2, np.log(1.3)), kind="bm")
    v0 = params.initial_compartments()[0]
    traj = propagate_ode(v0, path, params)
    s, e, i, r = v0
    infected = 1.3 * s * i / 1e6
    np.testing.assert_allclose(traj.compartments[-1, 0], [s - infected, e + infected - params.k * e, i + params.k * e - params.gamma * i, r + params.gamma * i])
    assert traj.incidence[0, 0] == pytest.approx(params.k * e)


def test_large_step_raises(params):
    grid = TimeGrid.regular(5, 7.0, 7.0)
    path = simulate_driver("bm", params, grid, 0)
    with pytest.raises(IntegrationError):
        propagate_ode(params.initial_compartments(), path, params)


def test_bad_initial_state(params, grid):
    path = simulate_driver("bm", params, grid, 0)
    with pytest.raises(DomainError):
        propagate_ode(np.array([1e6, 10.0, 10.0, 0.0]), path, params)
    with pytest.raises(DomainError):
        propagate_ode(np.array([1e6 + 10, -10.0, 0.0, 0.0]), path, params)


def _decay_error(params, delta, days=7.0):
    """Relative error of I(days) against I0 exp(-gamma t) with no new infections."""
    grid = TimeGrid.regular(1, days, delta)
    # beta = exp(-700) adds no infections
    path = LatentPath(grid=grid, x=np.full(grid.n_points, -700.0), kind="bm")
    i0 = 1000.0
    v0 = np.array([1e6 - i0, 0.0, i0, 0.0])
    traj = propagate_ode(v0, path, params)
    n_steps = grid.n_points - 1
    np.testing.assert_allclose(traj.I[-1, 0], i0 * (1 - params.gamma * delta) ** n_steps, rtol=1e-10)
    exact = i0 * np.exp(-params.gamma * days)
    return abs(traj.I[-1, 0] - exact) / exact


def test_euler_error_is_first_order(params):
    coarse = _decay_error(params, 0.1)
    fine = _decay_error(params, 0.05)
    assert fine < coarse
    assert 1.7 <= coarse / fine <= 2.3


def _two_groups(params, b=0.3):
    return params.replace(
        sigma=[0.07, 0.05],
        beta0=[1.4, 1.1],
        b=b,
        init_fractions=[[2e-5, 2e-5, 0.15], [0.0, 0.0, 0.15]],
        population=[2e5, 8e5],
    )


def test_two_groups_conserve_each_population(params, grid):
    p = _two_groups(params)
    path = simulate_driver("bm", p, grid, 0)
    traj = propagate_ode(p.initial_compartments(), path, p)
    assert traj.compartments.shape == (grid.n_points, 2, 4)
    np.testing.assert_allclose(traj.compartments.sum(axis=2), np.broadcast_to([2e5, 8e5], (grid.n_points, 2)), rtol=1e-9)
    assert np.all(traj.compartments >= 0)


def test_cross_group_contact_seeds_the_second_group(params, grid):
    p = _two_groups(params)
    path = simulate_driver("bm", p.replace(sigma=[0.0, 0.0]), grid, 0)
    traj = propagate_ode(p.initial_compartments(), path, p)
    assert traj.E[0, 1] == 0.0 and traj.I[0, 1] == 0.0
    assert traj.I[-1, 1] > 0.0
    assert traj.incidence[:, 1].sum() > 0.0
