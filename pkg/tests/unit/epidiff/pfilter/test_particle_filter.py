from __future__ import annotations

import numpy as np
import pytest

from epidiff.dynamics.grid import TimeGrid
from epidiff.dynamics.simulation import simulate_epidemic
from epidiff.model.structure import ModelSpec
from epidiff.model.surrogate import LinearGaussianModel
from epidiff.observation.lognormal import ObservationSeries
from epidiff.pfilter.particle_filter import particle_filter
from epidiff.pfilter.particle_filter import run_particle_filter
from epidiff.utils.errors import DomainError

SURROGATE = LinearGaussianModel.simulate(20, a=0.8, q=0.6, r=0.5, substeps=2, rng_seed=9)


def test_surrogate_likelihood_matches_kalman():
    exact = SURROGATE.kalman_loglik()
    lls = np.array([particle_filter(SURROGATE, 1000, seed, store_paths=False).loglik for seed in range(20)])
    se = lls.std(ddof=1) / np.sqrt(lls.shape[0])
    assert abs(lls.mean() - exact) < 3 * se + 0.05


def test_multinomial_and_adaptive_agree_with_kalman():
    exact = SURROGATE.kalman_loglik()
    for kwargs in ({"resampling": "multinomial"}, {"adaptive_resampling": True}):
        lls = [particle_filter(SURROGATE, 1000, seed, store_paths=False, **kwargs).loglik for seed in range(10)]
        assert abs(np.mean(lls) - exact) < 0.5


def test_seir_filter_output(model, params, epidemic, grid):
    result = run_particle_filter(model, params, epidemic.data, 100, grid, 0)
    assert not result.degenerate
    assert np.isfinite(result.loglik)
    assert result.loglik == pytest.approx(np.sum(result.loglik_increments))
    assert result.summary_names == ["beta", "S", "E", "I", "R", "incidence"]
    assert result.filter_means.shape == (12, 6)
    assert np.all((result.ess >= 1) & (result.ess <= 100 + 1e-9))
    assert len(result.segments) == 12
    assert result.segments[0].shape == (100, grid.steps_per_interval, 1)
    assert result.final_weights.sum() == pytest.approx(1.0)


def test_same_seed_same_likelihood(model, params, epidemic, grid):
    a = run_particle_filter(model, params, epidemic.data, 50, grid, 4)
    b = run_particle_filter(model, params, epidemic.data, 50, grid, 4)
    assert a.loglik == b.loglik
    np.testing.assert_array_equal(a.filter_means, b.filter_means)


def test_unstable_steps_make_the_filter_degenerate(model, params):
    grid = TimeGrid.regular(5, 7.0, 7.0)
    data = ObservationSeries(times=grid.obs_times, values=np.full(5, 100.0))
    result = run_particle_filter(model, params, data, 20, grid, 0)
    assert result.degenerate
    assert result.loglik == -np.inf


def test_needs_a_particle():
    with pytest.raises(DomainError):
        particle_filter(SURROGATE, 0)


def test_conditional_filter_keeps_the_reference():
    result = particle_filter(SURROGATE, 30, 1, conditional=True)
    assert all(parents[0] == 0 for parents in result.parents[1:])


def test_adaptive_filter_skips_resampling_when_ess_is_high():
    result = particle_filter(SURROGATE, 30, 1, adaptive_resampling=True, ess_threshold=0.0)
    for parents in result.parents:
        np.testing.assert_array_equal(parents, np.arange(30))


def test_likelihood_variance_shrinks_with_particles(model, params, epidemic, grid):
    variances = []
    for n in (50, 200, 800):
        lls = [run_particle_filter(model, params, epidemic.data, n, grid, seed, store_paths=False).loglik for seed in range(30)]
        variances.append(np.var(lls, ddof=1))
    assert variances[0] > variances[1] > variances[2]


def test_flat_observation_density_keeps_weights_uniform(model, params, epidemic, grid):
    result = run_particle_filter(model, params.replace(tau=1e3), epidemic.data, 200, grid, 0)
    assert np.all(result.ess >= 0.99 * 200)


def test_two_group_filter_has_finite_likelihood(params, grid):
    p = params.replace(
        sigma=[0.07, 0.05],
        beta0=[1.4, 1.1],
        b=0.3,
        init_fractions=[[2e-5, 2e-5, 0.15], [2e-5, 2e-5, 0.15]],
        population=[2e5, 8e5],
    )
    epidemic = simulate_epidemic(p, grid, "bm", 13)
    assert epidemic.data.n_groups == 2
    result = run_particle_filter(ModelSpec(kind="seir-2group"), p, epidemic.data, 200, grid, 0)
    assert not result.degenerate
    assert np.isfinite(result.loglik)
    assert result.segments[0].shape == (200, grid.steps_per_interval, 2)
