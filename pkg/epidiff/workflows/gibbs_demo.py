"""Gibbs demonstration.

Volatility chain of the data-augmentation Gibbs sampler next to PMMH run with
the same particles, iterations and sigma prior; only sigma is sampled.

"""
from __future__ import annotations

import numpy as np
import polars as pl

from epidiff.data.io import write_meta
from epidiff.gibbs.particle_gibbs import run_particle_gibbs_reparam
from epidiff.mcmc.diagnostics import ess
from epidiff.mcmc.pmmh import run_pmmh
from epidiff.model.priors import vague_positive_normal
from epidiff.utils.logging import get_logger
from epidiff.utils.rng import spawn_seeds
from epidiff.workflows.common import close_run
from epidiff.workflows.common import open_run

logger = get_logger(__name__)


def matched_pmmh_config(config):
    """PMMH settings with the Gibbs budget and only sigma sampled."""
    gibbs = config.gibbs
    return config.copy(
        update={
            "priors": {"sigma": config.priors.get("sigma", vague_positive_normal())},
            "filter": config.filter.copy(update={"n_particles": gibbs.n_particles}),
            "mcmc": config.mcmc.copy(update={"n_iters": gibbs.n_iters, "burn_in": gibbs.burn_in, "thin": gibbs.thin}),
        }
    )


def run_gibbs_demo(config, data, out_dir=None, progress=True):
    """sigma_trace.csv with both chains and ess_comparison.json.

    Returns:
        dict: efficiencies of both samplers and their ratio
    """
    out_dir = open_run(config, out_dir)
    gibbs_seed, pmmh_seed = spawn_seeds(config.seed, 2)
    grid = config.grid.build(data.times)
    gibbs = run_particle_gibbs_reparam(config.model, data, config, gibbs_seed, grid=grid, progress=progress)
    pmmh_config = matched_pmmh_config(config)
    pmmh = run_pmmh(pmmh_config.model, data, pmmh_config.prior_spec(), pmmh_config, pmmh_seed, grid=grid, progress=progress)

    iterations = np.arange(gibbs.n_iters)
    pl.concat(
        [
            pl.DataFrame({"iteration": iterations, "sigma": gibbs.column("sigma"), "accepted": gibbs.accepted}).with_columns(pl.lit("gibbs").alias("sampler")),
            pl.DataFrame({"iteration": np.arange(pmmh.n_iters), "sigma": pmmh.column("sigma"), "accepted": pmmh.accepted}).with_columns(pl.lit("pmmh").alias("sampler")),
        ]
    ).write_csv(f"{out_dir}/sigma_trace.csv")

    gibbs_eff = ess(gibbs.kept(gibbs.column("sigma")))
    pmmh_eff = ess(pmmh.kept(pmmh.column("sigma")))
    comparison = {
        "parametrisation": config.gibbs.parametrisation,
        "gibbs_efficiency": gibbs_eff,
        "pmmh_efficiency": pmmh_eff,
        "ratio": gibbs_eff / pmmh_eff if pmmh_eff > 0 else None,
        "gibbs_acceptance": float(gibbs.acc_rate[-1]),
        "pmmh_acceptance": float(pmmh.acc_rate[-1]),
        "gibbs_sigma_mean": float(gibbs.kept(gibbs.column("sigma")).mean()),
        "pmmh_sigma_mean": float(pmmh.kept(pmmh.column("sigma")).mean()),
    }
    write_meta(comparison, f"{out_dir}/ess_comparison.json")
    logger.info(f"sigma efficiency: gibbs {gibbs_eff:.4f}, pmmh {pmmh_eff:.4f}")
    close_run(config, out_dir, "gibbs-demo", **comparison)
    return comparison
