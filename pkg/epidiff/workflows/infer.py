"""Inference workflows.

Filtering at fixed parameters, the EKF, PMMH with its posterior summaries,
iterated filtering and re-summarising a finished run

"""
from __future__ import annotations

import os

import numpy as np
import polars as pl

from epidiff.data.io import read_chain
from epidiff.data.io import write_chain
from epidiff.data.io import write_meta
from epidiff.ekf.ekf import N_STATE
from epidiff.ekf.ekf import SEIREKFModel
from epidiff.ekf.ekf import extended_kalman_filter
from epidiff.mcmc.analysis import band_frame
from epidiff.mcmc.analysis import parameter_table
from epidiff.mcmc.analysis import posterior_bands
from epidiff.mcmc.diagnostics import MIN_LENGTH
from epidiff.mcmc.diagnostics import dic
from epidiff.mcmc.diagnostics import ess_table
from epidiff.mcmc.mif import mif_search
from epidiff.mcmc.pmmh import run_pmmh
from epidiff.model.params import flat_names
from epidiff.model.params import flatten_params
from epidiff.model.structure import group_labels
from epidiff.pfilter.particle_filter import run_particle_filter
from epidiff.pfilter.resampling import resample
from epidiff.pfilter.smoothing import trace_lineages
from epidiff.utils.configs.constants import COMPARTMENTS
from epidiff.utils.errors import DegenerateFilterError
from epidiff.utils.logging import get_logger
from epidiff.utils.rng import make_rng
from epidiff.workflows.common import close_run
from epidiff.workflows.common import open_run
from epidiff.workflows.common import run_meta

logger = get_logger(__name__)

STATE_NAMES = (*COMPARTMENTS, "z", "x", "v")
# genealogy draws behind the bands at a point estimate
N_PATH_DRAWS = 200


def _labels(n_groups):
    return [label or "all" for label in group_labels(n_groups)]


def filter_frame(result, times):
    """Filtering summary per observation: means, ESS and likelihood increments."""
    columns = {"time_days": np.asarray(times, dtype=np.float64), "loglik_increment": result.loglik_increments, "ess": result.ess}
    columns.update({name: result.filter_means[:, j] for j, name in enumerate(result.summary_names)})
    return pl.DataFrame(columns)


def filter_at(config, data, p, rng_seed, out_dir, grid=None):
    """Filter at ``p``; writes filter.csv and, when the run survives, smoothing bands.

    Returns:
        FilterResult
    """
    grid = grid or config.grid.build(data.times)
    rng = make_rng(rng_seed)
    settings = config.filter
    result = run_particle_filter(
        config.model,
        p,
        data,
        settings.n_particles,
        grid,
        rng,
        settings.resampling,
        settings.adaptive_resampling,
        settings.ess_threshold,
    )
    filter_frame(result, grid.obs_times).write_csv(f"{out_dir}/filter.csv")
    if result.degenerate:
        logger.warning("particle filter degenerated; no smoothing bands written")
        return result
    terminal = resample(result.final_weights, N_PATH_DRAWS, "multinomial", rng)
    paths = trace_lineages(result, terminal)
    band_frame("beta", grid.points, np.exp(paths), _labels(paths.shape[2])).write_csv(f"{out_dir}/bands.csv")
    logger.info(f"filter log likelihood {result.loglik:.3f}")
    return result


def run_filter(config, data, out_dir=None):
    """Bootstrap filter at ``config.params``."""
    out_dir = open_run(config, out_dir)
    result = filter_at(config, data, config.params, config.seed, out_dir)
    close_run(config, out_dir, "filter", loglik=result.loglik, degenerate=result.degenerate, min_ess=np.nanmin(result.ess))
    return out_dir, result


def beliefs_frame(beliefs, n_groups):
    """Means and standard deviations of the augmented state at every observation."""
    columns = {"time_days": [b.time for b in beliefs]}
    means = np.array([b.mean for b in beliefs])
    sds = np.sqrt(np.maximum(np.array([np.diag(b.cov) for b in beliefs]), 0.0))
    for g, label in enumerate(group_labels(n_groups)):
        suffix = f"_{label}" if label else ""
        for s, state in enumerate(STATE_NAMES):
            columns[f"{state}{suffix}"] = means[:, g * N_STATE + s]
            columns[f"{state}{suffix}_sd"] = sds[:, g * N_STATE + s]
    return pl.DataFrame(columns)


def run_ekf(config, data, out_dir=None):
    """EKF at ``config.params``: beliefs.csv, covariances.json and the log likelihood."""
    out_dir = open_run(config, out_dir)
    grid = config.grid.build(data.times)
    model = SEIREKFModel(config.model, config.params, data, grid)
    loglik, beliefs = extended_kalman_filter(model)
    frame = beliefs_frame(beliefs, config.model.n_groups)
    beta = model.beta_estimates(beliefs)
    for g, label in enumerate(group_labels(config.model.n_groups)):
        frame = frame.with_columns(pl.Series(f"beta_{label}" if label else "beta", beta[:, g]))
    frame.write_csv(f"{out_dir}/beliefs.csv")
    write_meta({"time_days": [b.time for b in beliefs], "covariance": [b.cov for b in beliefs]}, f"{out_dir}/covariances.json")
    logger.info(f"EKF log likelihood {loglik:.3f}")
    close_run(config, out_dir, "ekf", loglik=loglik)
    return out_dir, loglik, beliefs


def fit(config, data, rng_seed=None, progress=True, priors=None):
    """PMMH on ``data`` with the config's grid and priors (or ``priors`` when given).

    Returns:
        tuple[ChainOutput, PriorSpec, TimeGrid]
    """
    priors = config.prior_spec() if priors is None else priors
    grid = config.grid.build(data.times)
    chain = run_pmmh(config.model, data, priors, config, config.seed if rng_seed is None else rng_seed, grid=grid, progress=progress)
    return chain, priors, grid


def write_posterior(chain, out_dir, priors=None, grid=None):
    """summary.csv, ess.csv and bands.csv of a chain; skips what the chain is too short for.

    Returns:
        dict[str, pl.DataFrame]
    """
    tables = {}
    n_kept = chain.kept().shape[0]
    if n_kept:
        tables["summary"] = parameter_table(chain)
    if n_kept >= MIN_LENGTH:
        tables["ess"] = ess_table(chain)
    if chain.kept_paths()[0].shape[0]:
        tables["bands"] = posterior_bands(chain, priors, grid)
    for name, table in tables.items():
        table.write_csv(f"{out_dir}/{name}.csv")
    if not tables:
        logger.warning("chain ends inside the burn-in; nothing to summarise")
    return tables


def infer(config, data, out_dir=None, progress=True):
    """PMMH end to end: chain files, posterior tables and DIC."""
    out_dir = open_run(config, out_dir)
    rng = make_rng(config.seed)
    chain, priors, grid = fit(config, data, rng, progress)
    tables = write_posterior(chain, out_dir, priors, grid)
    extra = {"eps_trace": chain.eps}
    if "ess" in tables:
        extra["ess"] = tables["ess"].to_dicts()
    if "summary" in tables and priors.dim:
        try:
            result = dic(chain, config.model, data, config.filter.n_particles, rng, priors, grid)
            extra["dic"] = {"dic": result.dic, "mean_deviance": result.mean_deviance, "p_d": result.p_d}
        except DegenerateFilterError as err:
            logger.warning(f"DIC not computed: {err}")
    write_chain(chain, out_dir, run_meta(config, "infer", **extra))
    return out_dir, chain


def run_mif(config, data, out_dir=None, progress=True):
    """Iterated-filtering estimate, its pass-by-pass trace and a filter at the estimate."""
    out_dir = open_run(config, out_dir)
    rng = make_rng(config.seed)
    priors = config.prior_spec()
    grid = config.grid.build(data.times)
    estimate, result = mif_search(config.model, data, priors, config.mif, rng, config.params, grid, progress=progress)
    trace = pl.DataFrame(
        {
            "pass": np.arange(1, result.trace.shape[0] + 1),
            "loglik": result.loglik,
            **{name: result.trace[:, j] for j, name in enumerate(priors.coordinate_names())},
        }
    )
    trace.write_csv(f"{out_dir}/mif_trace.csv")
    names = flat_names(config.model.n_groups, config.model.driver)
    values = flatten_params(estimate, config.model.driver)
    filtered = filter_at(config, data, estimate, rng, out_dir, grid)
    close_run(config, out_dir, "mif", estimate=dict(zip(names, values)), loglik_at_estimate=filtered.loglik)
    return out_dir, estimate


def summarize(run_dir, out_dir=None):
    """Recompute summary, ESS and bands from the files of a finished run.

    Paths are stored at the observation times, so R_t bands are not rebuilt.
    """
    chain = read_chain(run_dir)
    out_dir = out_dir or run_dir
    os.makedirs(out_dir, exist_ok=True)
    tables = write_posterior(chain, out_dir)
    for name, table in tables.items():
        if name != "bands":
            logger.info(f"{name}:\n{table}")
    return tables
