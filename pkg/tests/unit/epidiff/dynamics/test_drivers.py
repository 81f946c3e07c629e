from __future__ import annotations

import numpy as np
import pytest

from epidiff.dynamics.drivers import quadratic_variation
from epidiff.dynamics.drivers import simulate_driver
from epidiff.dynamics.drivers import slope_path
from epidiff.dynamics.grid import TimeGrid
from epidiff.model.structure import SigmoidSpec
from epidiff.utils.errors import DomainError

FINE = TimeGrid.regular(12, 7.0, 0.1)


def test_brownian_quadratic_variation(params):
    sigma = 0.07
    expected = sigma**2 * FINE.tn
    se = sigma**2 * np.sqrt(2 * FINE.tn * FINE.interval_deltas[0])
    for seed in range(3):
        qv = quadratic_variation(simulate_driver("bm", params, FINE, seed))
        assert abs(qv - expected) < 3 * se


def test_zero_volatility_is_constant(params):
    path = simulate_driver("bm", params.replace(sigma=[0.0]), FINE, 0)
    np.testing.assert_allclose(path.beta, 1.3)
    assert quadratic_variation(path) == 0.0


def test_path_starts_at_beta0(params, grid):
    for kind in ("bm", "ibm", "ou"):
        path = simulate_driver(kind, params.replace(ou_rate=0.1), grid, 1)
        assert path.x.shape == (grid.n_points, 1)
        assert path.beta[0, 0] == pytest.approx(1.3)


def test_integrated_brownian_without_noise_is_linear(params):
    path = simulate_driver("ibm", params.replace(sigma=[0.0], slope0=0.01), FINE, 2)
    np.testing.assert_allclose(slope_path(path), 0.01)
    np.testing.assert_allclose(path.x[:, 0], np.log(1.3) + 0.01 * FINE.points)


def test_ou_reverts_to_its_mean(params):
    p = params.replace(sigma=[0.0], ou_rate=0.5, ou_mean=0.0)
    path = simulate_driver("ou", p, FINE, 0)
    assert abs(path.x[-1, 0]) < 1e-6


def test_sigmoid_follows_the_curve(params, grid):
    curve = SigmoidSpec(t_mid=40.0)
    path = simulate_driver("sigmoid", params, grid, sigmoid=curve)
    np.testing.assert_allclose(path.x[:, 0], curve.log_beta(grid.points))
    assert path.beta[0, 0] > path.beta[-1, 0]
    np.testing.assert_allclose(path.at_obs()[:, 0], curve.log_beta(grid.obs_times))


def test_same_seed_same_path(params, grid):
    np.testing.assert_array_equal(simulate_driver("bm", params, grid, 4).x, simulate_driver("bm", params, grid, 4).x)


def test_unknown_driver(params, grid):
    with pytest.raises(DomainError):
        simulate_driver("levy", params, grid, 0)


def test_integrated_brownian_has_vanishing_quadratic_variation(params):
    # x is differentiable, so its squared increments shrink with the step
    coarse = TimeGrid.regular(12, 7.0, 0.1)
    fine = TimeGrid.regular(12, 7.0, 0.01)
    qv_coarse = sum(quadratic_variation(simulate_driver("ibm", params, coarse, seed)) for seed in range(20))
    qv_fine = sum(quadratic_variation(simulate_driver("ibm", params, fine, seed)) for seed in range(20))
    assert qv_fine < 0.3 * qv_coarse
    slope_qv = np.sum(np.diff(slope_path(simulate_driver("ibm", params, fine, 0)), axis=0) ** 2)
    assert slope_qv == pytest.approx(0.07**2 * fine.tn, rel=0.1)
