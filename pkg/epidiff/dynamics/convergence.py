"""Euler step selection.

Particle-filter log likelihood as a function of the Euler step; the step is
small enough once successive estimates differ by less than their Monte Carlo
spread.

"""
from __future__ import annotations

import numpy as np
import polars as pl

from epidiff.dynamics.state_space import SEIRStateSpace
from epidiff.pfilter.particle_filter import particle_filter
from epidiff.utils.errors import DomainError
from epidiff.utils.logging import get_logger
from epidiff.utils.rng import spawn_seeds

logger = get_logger(__name__)


def loglik_by_delta(build_model, deltas, n_particles, rng_seed=0, n_reps=1):
    """Filter log likelihood for each step in ``deltas``.

    Args:
        build_model (Callable[[float], object]):
            state-space model for a given Euler step
        deltas (list[float]):
            decreasing Euler steps in days
        n_particles (int):
            particles per filter run
        rng_seed (int):
            the same replicate seeds are reused at every step
        n_reps (int):
            filter replicates per step, for the Monte Carlo sd

    Returns:
        pl.DataFrame: columns delta, loglik, loglik_sd, abs_change
    """
    deltas = [float(d) for d in deltas]
    if any(later >= earlier for earlier, later in zip(deltas, deltas[1:])):
        raise DomainError("deltas", "must be strictly decreasing")
    seeds = spawn_seeds(rng_seed, n_reps)
    rows = []
    for delta in deltas:
        model = build_model(delta)
        lls = np.array([particle_filter(model, n_particles, seed, store_paths=False).loglik for seed in seeds])
        rows.append({"delta": delta, "loglik": lls.mean(), "loglik_sd": lls.std(ddof=1) if n_reps > 1 else np.nan})
        logger.info(f"delta={delta:g}: loglik {rows[-1]['loglik']:.3f}")
    table = pl.DataFrame(rows)
    return table.with_columns(pl.col("loglik").diff().abs().alias("abs_change"))


def euler_convergence_study(model, params, data, deltas, n_particles=500, rng_seed=0, n_reps=5, t0=0.0):
    """SEIR filter log likelihood on grids of decreasing step.

    Args:
        model (ModelSpec):
            model and driver kind
        params (ParamSet):
            parameters at which the likelihood is estimated
        data (ObservationSeries):
            weekly counts
        deltas (list[float]):
            decreasing Euler steps in days
        n_particles (int):
            particles per run
        rng_seed (int):
            seed
        n_reps (int):
            replicates per step
        t0 (float):
            start of the epidemic

    Returns:
        pl.DataFrame
    """
    return loglik_by_delta(lambda delta: SEIRStateSpace(model, params, data, data.grid(delta, t0)), deltas, n_particles, rng_seed, n_reps)
