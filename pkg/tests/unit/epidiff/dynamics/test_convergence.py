from __future__ import annotations

import numpy as np
import pytest

from epidiff.dynamics.convergence import euler_convergence_study
from epidiff.dynamics.convergence import loglik_by_delta
from epidiff.model.surrogate import LinearGaussianModel
from epidiff.utils.errors import DomainError


def test_table_per_step(model, params, epidemic):
    table = euler_convergence_study(model, params, epidemic.data, [1.0, 0.5], n_particles=50, rng_seed=0, n_reps=2)
    assert table.columns == ["delta", "loglik", "loglik_sd", "abs_change"]
    assert table["delta"].to_list() == [1.0, 0.5]
    assert table["abs_change"][0] is None
    assert np.isfinite(table["loglik"].to_numpy()).all()


def test_surrogate_does_not_depend_on_step():
    y = LinearGaussianModel.simulate(10, rng_seed=0).y

    def build(delta):
        return LinearGaussianModel(y, substeps=int(round(1 / delta)) - 1)

    table = loglik_by_delta(build, [1.0, 0.25], n_particles=2000, rng_seed=1, n_reps=3)
    exact = LinearGaussianModel(y).kalman_loglik()
    np.testing.assert_allclose(table["loglik"].to_numpy(), exact, atol=0.5)


def test_steps_must_decrease(model, params, epidemic):
    with pytest.raises(DomainError):
        euler_convergence_study(model, params, epidemic.data, [0.5, 1.0], n_particles=10)


def test_likelihood_changes_halve_with_the_step(model, params, epidemic):
    # without driver noise every particle follows the same path, so the estimate is exact
    deterministic = params.replace(sigma=[0.0])
    table = euler_convergence_study(model, deterministic, epidemic.data, [0.25, 0.125, 0.0625, 0.03125], n_particles=10, rng_seed=0, n_reps=1)
    changes = table["abs_change"].to_numpy()[1:]
    assert np.all(changes > 0)
    assert 1.7 <= changes[-2] / changes[-1] <= 2.3
