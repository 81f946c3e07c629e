from __future__ import annotations

import numpy as np

from epidiff.mcmc.mif import iterated_filtering
from epidiff.mcmc.mif import mif_estimate
from epidiff.mcmc.mif import mif_search
from epidiff.model.priors import build_prior_spec
from epidiff.model.priors import vague_positive_normal
from epidiff.model.surrogate import LinearGaussianModel
from epidiff.utils.configs.data_models import MIFConfig


def _set_log_q(model, theta):
    model.set_batch({"a": 0.8, "q": np.exp(theta[:, 0]), "r": 0.5})


def test_surrogate_noise_is_pulled_down():
    model = LinearGaussianModel.simulate(100, a=0.8, q=0.4, r=0.5, rng_seed=4)
    result = iterated_filtering(model, _set_log_q, np.array([np.log(2.0)]), 15, 0.9, 0.05, 300, rng_seed=0, progress=False)
    assert result.trace.shape == (15, 1)
    assert np.all(np.isfinite(result.loglik))
    assert result.theta[0] < np.log(2.0) - 0.3
    # the fitted model explains the data better than the start
    assert result.loglik[-1] > result.loglik[0]


def test_seir_search(model, params, epidemic, grid):
    spec = build_prior_spec(params, "bm", {"tau": vague_positive_normal(), "beta0": vague_positive_normal()})
    config = MIFConfig(n_passes=3, n_particles=60, perturb_sd=0.05)
    estimate, result = mif_search(model, epidemic.data, spec, config, 1, params, grid, progress=False)
    assert result.trace.shape == (3, 2)
    assert estimate.tau > 0
    assert estimate.gamma == params.gamma
    np.testing.assert_allclose(np.log([estimate.tau, estimate.beta0[0]]), result.theta)
    again = mif_estimate(model, epidemic.data, spec, config, 1, params, grid, progress=False)
    assert again.tau == estimate.tau


def test_no_perturbation_returns_start(model, params, epidemic, grid):
    spec = build_prior_spec(params, "bm", {"tau": vague_positive_normal()})
    estimate, result = mif_search(model, epidemic.data, spec, MIFConfig(n_passes=4, perturb_sd=0.0), 0, params, grid, progress=False)
    assert estimate is params
    assert result.trace.shape == (4, 1)
    assert np.all(np.isnan(result.loglik))
