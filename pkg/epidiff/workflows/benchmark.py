"""Benchmarks.

Tuning and comparison studies on synthetic data. Each study writes a
``report.csv`` and a tidy ``plot_data.csv`` (series, x, y) into its own
subdirectory of the run.

"""
from __future__ import annotations

import os
from functools import partial

import numpy as np
import polars as pl

from epidiff.dynamics.convergence import euler_convergence_study
from epidiff.mcmc.diagnostics import ess_table
from epidiff.mcmc.pmmh import run_pmmh
from epidiff.mcmc.pmmh import seed_covariance
from epidiff.pfilter.benchmark import ekf_pf_benchmark
from epidiff.utils.errors import ConfigError
from epidiff.utils.logging import get_logger
from epidiff.utils.rng import spawn_seeds
from epidiff.utils.utils import fan_out
from epidiff.workflows.common import close_run
from epidiff.workflows.common import open_run
from epidiff.workflows.simulate import simulate_from_config

logger = get_logger(__name__)

STUDIES = ("euler", "nparts", "ekf-vs-pf", "adapt-ess")
SEED_COVS = ("identity", "ek-mode", "ek-mcmc")
ADAPT_MODES = ("scale", "scale+cov")


def plot_frame(series, x, y):
    return pl.DataFrame({"series": [str(s) for s in series], "x": np.asarray(x, dtype=np.float64), "y": np.asarray(y, dtype=np.float64)})


def with_chain_settings(config, **changes):
    """Copy of ``config`` with ``mcmc`` fields replaced."""
    return config.copy(update={"mcmc": config.mcmc.copy(update=changes)})


def euler_study(config, data_seed, run_seed):
    """Filter log likelihood at the true parameters for each Euler step."""
    data = simulate_from_config(config, data_seed).data
    settings = config.benchmark
    report = euler_convergence_study(
        config.model,
        config.params,
        data,
        settings.deltas,
        config.filter.n_particles,
        run_seed,
        settings.euler_reps,
        config.grid.t0,
    )
    return report, plot_frame(["loglik"] * report.height, report["delta"].to_numpy(), report["loglik"].to_numpy())


def _acceptance_cell(config, data, proposal, grid, cell):
    """Acceptance rate of a non-adaptive chain with ``n_particles`` particles."""
    tau, n_particles = cell
    cell_config = with_chain_settings(config, n_iters=config.benchmark.nparts_iters, burn_in=0, adapt="none")
    cell_config = cell_config.copy(update={"filter": config.filter.copy(update={"n_particles": n_particles})})
    chain = run_pmmh(cell_config.model, data[tau], cell_config.prior_spec(), cell_config, config.seed, grid=grid, proposal=proposal[tau], progress=False)
    return {"tau": tau, "n_particles": n_particles, "acceptance": float(chain.acc_rate[-1])}


def nparts_study(config, data_seed, run_seed, threads=1):
    """PMMH acceptance against particle count, one curve per observation sd.

    Every cell uses the same fixed proposal for its dataset so acceptance rates
    only reflect the variance of the likelihood estimate.
    """
    settings = config.benchmark
    grid = config.grid.build()
    priors = config.prior_spec()
    data, proposal = {}, {}
    for tau in settings.nparts_taus:
        data[tau] = simulate_from_config(config, data_seed, tau).data
        proposal[tau] = seed_covariance(config.model, data[tau], priors, config, config.params, grid, run_seed)
    cells = [(tau, n) for tau in settings.nparts_taus for n in settings.particle_counts]
    rows = fan_out(partial(_acceptance_cell, config, data, proposal, grid), cells, threads, desc="nparts")
    report = pl.DataFrame(rows)
    plot = plot_frame([f"tau={r['tau']:g}" for r in rows], report["n_particles"].to_numpy(), report["acceptance"].to_numpy())
    return report, plot


def ekf_vs_pf_study(config, data_seed, threads=1):
    """Bias and MSE of EKF, particle filter and genealogy smoother beta estimates."""
    report = ekf_pf_benchmark(config.benchmark.n_datasets, config.params, config.grid.build(), config.filter.n_particles, data_seed, threads)
    long = report.melt(id_vars="estimator", value_vars=["abs_bias", "mse"])
    plot = pl.DataFrame(
        {
            "series": long["variable"],
            "x": long["estimator"],
            "y": long["value"],
        }
    )
    return report, plot


def _ess_cell(config, data, grid, cell):
    seed_cov, adapt = cell
    n_iters = config.benchmark.ess_iters
    cell_config = with_chain_settings(config, n_iters=n_iters, burn_in=min(config.mcmc.burn_in, n_iters // 2), adapt=adapt, seed_cov=seed_cov)
    chain = run_pmmh(cell_config.model, data, cell_config.prior_spec(), cell_config, config.seed, grid=grid, progress=False)
    table = ess_table(chain)
    worst = table.sort("efficiency").row(0, named=True) if table.height else {"name": None, "efficiency": np.nan, "ess": np.nan}
    return {
        "seed_cov": seed_cov,
        "adapt": adapt,
        "min_efficiency_pct": 100 * worst["efficiency"],
        "min_ess": worst["ess"],
        "worst_column": worst["name"],
        "acceptance": float(chain.acc_rate[-1]),
        "seed_cov_warning": chain.meta.get("seed_cov_warning"),
    }


def adapt_ess_study(config, data_seed, threads=1):
    """Minimum ESS of the six combinations of Sigma0 source and adaptation mode."""
    data = simulate_from_config(config, data_seed).data
    grid = config.grid.build(data.times)
    cells = [(seed_cov, adapt) for adapt in ADAPT_MODES for seed_cov in SEED_COVS]
    rows = fan_out(partial(_ess_cell, config, data, grid), cells, threads, desc="adapt-ess")
    report = pl.DataFrame(rows)
    plot = pl.DataFrame({"series": report["adapt"], "x": report["seed_cov"], "y": report["min_efficiency_pct"]})
    return report, plot


def run_benchmark(study, config, out_dir=None):
    """Run one study and write its report and plot data.

    Args:
        study (str):
            one of ``euler``, ``nparts``, ``ekf-vs-pf``, ``adapt-ess``
        config (RunConfig):
            resolved config; ``benchmark`` holds the study settings
        out_dir (str | None):
            run directory; the study writes into ``<out_dir>/<study>``

    Returns:
        pl.DataFrame: the report
    """
    if study not in STUDIES:
        raise ConfigError(f"unknown study {study!r}; choose one of {', '.join(STUDIES)}")
    out_dir = open_run(config, out_dir)
    study_dir = f"{out_dir}/{study}"
    os.makedirs(study_dir, exist_ok=True)
    data_seed, run_seed = spawn_seeds(config.seed, 2)
    logger.info(f"benchmark {study} started")
    if study == "euler":
        report, plot = euler_study(config, data_seed, run_seed)
    elif study == "nparts":
        report, plot = nparts_study(config, data_seed, run_seed, config.threads)
    elif study == "ekf-vs-pf":
        report, plot = ekf_vs_pf_study(config, data_seed, config.threads)
    else:
        report, plot = adapt_ess_study(config, data_seed, config.threads)
    report.write_csv(f"{study_dir}/report.csv")
    plot.write_csv(f"{study_dir}/plot_data.csv")
    close_run(config, study_dir, "benchmark", study=study)
    logger.info(f"benchmark {study} written to {study_dir}")
    return report
