"""EKF against particle filter.

Bias and mean squared error of the filtered and smoothed beta estimates on
synthetic Brownian-driver epidemics whose static parameters are known.

"""
from __future__ import annotations

from functools import partial

import numpy as np
import polars as pl

from epidiff.dynamics.simulation import simulate_epidemic
from epidiff.ekf.ekf import SEIREKFModel
from epidiff.ekf.ekf import extended_kalman_filter
from epidiff.model.structure import ModelSpec
from epidiff.pfilter.particle_filter import run_particle_filter
from epidiff.pfilter.smoothing import smoothing_mean
from epidiff.utils.logging import get_logger
from epidiff.utils.rng import make_rng
from epidiff.utils.rng import spawn_seeds
from epidiff.utils.utils import fan_out

logger = get_logger(__name__)

ESTIMATORS = ("EKF", "particle filter", "particle smoother")


def _dataset_errors(params, grid, n_particles, seed):
    """beta estimation errors at the observation times, (3, n_obs, n_groups)."""
    model = ModelSpec(kind="seir" if params.n_groups == 1 else "seir-2group", driver="bm")
    rng = make_rng(seed)
    epidemic = simulate_epidemic(params, grid, "bm", rng)
    truth = np.exp(epidemic.path.at_obs())
    ekf_model = SEIREKFModel(model, params, epidemic.data, grid)
    _, beliefs = extended_kalman_filter(ekf_model)
    ekf_beta = ekf_model.beta_estimates(beliefs)
    result = run_particle_filter(model, params, epidemic.data, n_particles, grid, rng)
    beta_cols = [j for j, name in enumerate(result.summary_names) if name.startswith("beta")]
    pf_beta = result.filter_means[:, beta_cols]
    smooth_beta = smoothing_mean(result)[grid.obs_index]
    return np.stack([ekf_beta, pf_beta, smooth_beta]) - truth[None, ...]


def ekf_pf_benchmark(n_datasets, params, grid, n_particles=500, rng_seed=None, threads=1):
    """Compare EKF filtering, particle filtering and genealogy smoothing of beta.

    Args:
        n_datasets (int):
            number of synthetic epidemics
        params (ParamSet):
            known static parameters of every dataset
        grid (TimeGrid):
            Euler grid with the observation schedule
        n_particles (int):
            particles of the filter
        rng_seed (int | np.random.SeedSequence | None):
            seed; each dataset gets its own stream
        threads (int):
            worker processes

    Returns:
        pl.DataFrame: estimator, bias, abs_bias, mse
    """
    seeds = spawn_seeds(rng_seed, n_datasets)
    run = partial(_dataset_errors, params, grid, n_particles)
    errors = np.stack(fan_out(run, seeds, threads, desc="ekf-vs-pf"))
    rows = []
    for e, name in enumerate(ESTIMATORS):
        err = errors[:, e]
        bias = float(err.mean())
        rows.append({"estimator": name, "bias": bias, "abs_bias": abs(bias), "mse": float(np.mean(err**2))})
    logger.info(f"ekf-vs-pf benchmark over {n_datasets} datasets done")
    return pl.DataFrame(rows)
