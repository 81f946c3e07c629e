from __future__ import annotations

import numpy as np
import pytest
from scipy import stats

from epidiff.ekf.proposals import ProposalCovariance
from epidiff.ekf.proposals import chain_covariance
from epidiff.ekf.proposals import ek_mcmc
from epidiff.ekf.proposals import ek_mode
from epidiff.ekf.proposals import make_spd
from epidiff.ekf.proposals import mode_and_curvature
from epidiff.ekf.proposals import numerical_hessian
from epidiff.mcmc.sampler import Evaluation
from epidiff.model.priors import build_prior_spec
from epidiff.model.priors import vague_positive_normal
from epidiff.utils.errors import DomainError
from epidiff.utils.errors import NumericalError

MEAN = np.array([0.5, -1.0])
COV = np.array([[0.4, 0.1], [0.1, 0.2]])


def _gaussian(v):
    return float(stats.multivariate_normal.logpdf(v, MEAN, COV))


def test_make_spd():
    assert make_spd(np.zeros((2, 2))) is None
    assert make_spd(-np.eye(2)) is None
    fixed = make_spd(np.array([[1.0, 0.0], [0.0, -1.0]]))
    assert np.linalg.eigvalsh(fixed).min() > 0
    np.testing.assert_array_equal(make_spd(COV), COV)


def test_hessian_of_quadratic():
    a = np.array([[2.0, 0.5], [0.5, 1.0]])
    hess = numerical_hessian(lambda x: -0.5 * x @ a @ x, np.array([0.3, -0.7]))
    np.testing.assert_allclose(hess, -a, atol=1e-5)


def test_mode_and_curvature_of_gaussian():
    proposal = mode_and_curvature(_gaussian, np.zeros(2))
    assert proposal.tag == "ek-mode"
    assert proposal.warning is None
    np.testing.assert_allclose(proposal.theta, MEAN, atol=1e-5)
    np.testing.assert_allclose(proposal.matrix, COV, rtol=1e-3)


def test_provenance_is_checked():
    with pytest.raises(DomainError):
        ProposalCovariance(matrix=np.eye(2), tag="guess")
    with pytest.raises(NumericalError):
        ProposalCovariance(matrix=-np.eye(2), tag="ek-mcmc")
    assert ProposalCovariance.identity(3).matrix.shape == (3, 3)


def test_chain_covariance_of_gaussian():
    proposal = chain_covariance(lambda v, rng: Evaluation(_gaussian(v)), lambda v: 0.0, MEAN, 10_000, rng_seed=0)
    assert proposal.tag == "ek-mcmc"
    np.testing.assert_allclose(proposal.matrix, COV, atol=0.08)
    np.testing.assert_allclose(proposal.theta, MEAN, atol=0.15)


def test_ek_mode_on_seir(model, params, epidemic, grid):
    spec = build_prior_spec(params, "bm", {"tau": vague_positive_normal(), "beta0": vague_positive_normal()})
    theta, proposal = ek_mode(model, epidemic.data, params, spec, grid)
    assert theta.shape == (2,)
    assert proposal.matrix.shape == (2, 2)
    assert np.all(np.linalg.eigvalsh(proposal.matrix) > 0)
    assert abs(np.exp(theta[1]) - 1.3) < 0.3


def test_ek_mcmc_on_seir(model, params, epidemic, grid):
    spec = build_prior_spec(params, "bm", {"tau": vague_positive_normal(), "beta0": vague_positive_normal()})
    proposal = ek_mcmc(model, epidemic.data, spec, 400, rng_seed=1, p_init=params, grid=grid)
    assert proposal.tag == "ek-mcmc"
    assert np.all(np.linalg.eigvalsh(proposal.matrix) > 0)
