from __future__ import annotations

import numpy as np
import pytest
from scipy import stats

from epidiff.mcmc.sampler import Evaluation
from epidiff.mcmc.sampler import log_acceptance_ratio
from epidiff.mcmc.sampler import mixture_logpdf
from epidiff.mcmc.sampler import run_adaptive_metropolis
from epidiff.utils.configs.data_models import MCMCConfig
from epidiff.utils.errors import DegenerateInferenceError

MEAN = np.array([1.0, -2.0])
COV = np.array([[1.0, 0.6], [0.6, 0.5]])


def _target(v, rng):
    return Evaluation(float(stats.multivariate_normal.logpdf(v, MEAN, COV)))


def _flat(v):
    return 0.0


def test_gaussian_target_is_recovered():
    config = MCMCConfig(n_iters=20_000, burn_in=5_000, adapt="scale+cov")
    chain = run_adaptive_metropolis(_target, _flat, np.zeros(2), np.eye(2), config, 0, progress=False)
    kept = chain.kept()
    assert kept.shape == (15_000, 2)
    np.testing.assert_allclose(kept.mean(axis=0), MEAN, atol=0.1)
    np.testing.assert_allclose(np.cov(kept, rowvar=False), COV, atol=0.15)
    assert 0.1 < chain.acc_rate[-1] < 0.6


def test_fixed_proposal_keeps_scale():
    config = MCMCConfig(n_iters=200, burn_in=0, adapt="none", eps0=0.5)
    chain = run_adaptive_metropolis(_target, _flat, MEAN, COV, config, 1, progress=False)
    np.testing.assert_array_equal(chain.eps, 0.5)
    assert chain.accepted.sum() == round(chain.acc_rate[-1] * 200)


def test_transform_and_names():
    config = MCMCConfig(n_iters=50, burn_in=10, adapt="scale")
    chain = run_adaptive_metropolis(
        _target, _flat, MEAN, np.eye(2), config, 2, transform=np.exp, names=["a", "b"], coordinate_names=["log_a", "log_b"], progress=False
    )
    np.testing.assert_allclose(chain.draws, np.exp(chain.unconstrained))
    np.testing.assert_array_equal(chain.column("b"), chain.draws[:, 1])
    assert chain.n_iters == 50
    assert chain.kept().shape[0] == 40


def test_prior_support_is_respected():
    config = MCMCConfig(n_iters=500, burn_in=0)
    chain = run_adaptive_metropolis(_target, lambda v: 0.0 if v[0] > 0 else -np.inf, np.ones(2), np.eye(2), config, 3, progress=False)
    assert np.all(chain.unconstrained[:, 0] > 0)


def test_same_seed_same_chain():
    config = MCMCConfig(n_iters=100, burn_in=0)
    a = run_adaptive_metropolis(_target, _flat, np.zeros(2), np.eye(2), config, 5, progress=False)
    b = run_adaptive_metropolis(_target, _flat, np.zeros(2), np.eye(2), config, 5, progress=False)
    np.testing.assert_array_equal(a.draws, b.draws)


def test_degenerate_start():
    config = MCMCConfig(n_iters=10, burn_in=0)
    with pytest.raises(DegenerateInferenceError):
        run_adaptive_metropolis(lambda v, rng: Evaluation(-np.inf), _flat, np.zeros(2), np.eye(2), config, 0, progress=False)


def test_acceptance_ratio():
    assert log_acceptance_ratio(-1.0, 0.0, -2.0, 0.0) == pytest.approx(1.0)
    assert log_acceptance_ratio(-np.inf, 0.0, -np.inf, 0.0) == -np.inf
    assert log_acceptance_ratio(-1.0, -1.0, -1.0, -1.0, 0.5, 0.2) == pytest.approx(-0.3)


def test_mixture_density():
    theta = np.zeros(2)
    x = np.array([0.3, -0.2])
    scale = 2.38**2 / 2
    single = mixture_logpdf(x, theta, 1.0, np.eye(2))
    assert single == pytest.approx(stats.multivariate_normal.logpdf(x, theta, scale * np.eye(2)))
    both = mixture_logpdf(x, theta, 1.0, np.eye(2), np.eye(2))
    assert both == pytest.approx(single)
