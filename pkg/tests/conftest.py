from __future__ import annotations

import pytest

from epidiff.dynamics.grid import TimeGrid
from epidiff.dynamics.simulation import simulate_epidemic
from epidiff.model.params import ParamSet
from epidiff.model.priors import build_prior_spec
from epidiff.model.priors import vague_positive_normal
from epidiff.model.structure import ModelSpec
from epidiff.utils.configs.data_models import RunConfig

# experiment 1 truth
TRUTH = {
    "k": 0.6289308,
    "gamma": 0.9259259,
    "tau": 0.1,
    "sigma": [0.07],
    "beta0": [1.3],
    "init_fractions": [[2.0e-5, 2.0e-5, 0.15]],
    "population": [1.0e6],
}


@pytest.fixture(scope="session")
def params():
    return ParamSet(**TRUTH)


@pytest.fixture(scope="session")
def model():
    return ModelSpec()


@pytest.fixture(scope="session")
def grid():
    """Twelve weeks with a half-day step."""
    return TimeGrid.regular(12, 7.0, 0.5)


@pytest.fixture(scope="session")
def epidemic(params, grid):
    return simulate_epidemic(params, grid, "bm", 11)


@pytest.fixture(scope="session")
def priors(params):
    return build_prior_spec(params, "bm", {"tau": vague_positive_normal(), "sigma": vague_positive_normal(), "beta0": vague_positive_normal()})


@pytest.fixture
def run_config():
    """Small run: twelve weeks, few particles, short chains."""
    return RunConfig(
        experiment_id="unit",
        params=TRUTH,
        priors={"tau": {"kind": "vague_positive_normal"}, "sigma": {"kind": "vague_positive_normal"}},
        grid={"n_obs": 12, "delta": 0.5},
        filter={"n_particles": 50},
        mcmc={"n_iters": 40, "burn_in": 10, "thin": 5, "seed_cov": "identity", "ek_mcmc_iters": 200},
        mif={"n_passes": 3, "n_particles": 50},
        gibbs={"n_iters": 20, "n_particles": 30, "burn_in": 5, "thin": 5},
        seed=3,
    )
