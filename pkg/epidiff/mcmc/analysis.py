"""Posterior functionals.

Pointwise credible bands for beta_t, R_t and weekly incidence from the
smoothing draws stored with a chain, and the posterior of the change in
beta between two days.

"""
from __future__ import annotations

import numpy as np
import polars as pl

from epidiff.dynamics.drivers import LatentPath
from epidiff.dynamics.ode import propagate_ode
from epidiff.model.reproduction import effective_reproduction
from epidiff.model.structure import group_labels
from epidiff.model.transforms import from_unconstrained
from epidiff.utils.configs.constants import QUANTILE_NAMES
from epidiff.utils.configs.constants import QUANTILES
from epidiff.utils.errors import DomainError
from epidiff.utils.errors import NumericalError
from epidiff.utils.logging import get_logger

logger = get_logger(__name__)


def quantile_summary(draws):
    """Mean and reporting quantiles along the first axis."""
    draws = np.asarray(draws, dtype=np.float64)
    if draws.shape[0] == 0:
        raise DomainError("draws", "no draws to summarise")
    out = {"mean": draws.mean(axis=0)}
    for name, value in zip(QUANTILE_NAMES, np.quantile(draws, QUANTILES, axis=0)):
        out[name] = value
    return out


def band_frame(quantity, times, draws, labels):
    """Long-format bands of (n_draws, n_times, n_groups) draws."""
    summary = quantile_summary(draws)
    frames = []
    for g, label in enumerate(labels):
        frames.append(
            pl.DataFrame(
                {
                    "quantity": [quantity] * len(times),
                    "group": [label] * len(times),
                    "time": np.asarray(times, dtype=np.float64),
                    **{name: values[:, g] for name, values in summary.items()},
                }
            )
        )
    return pl.concat(frames)


def reproduction_draws(chain, priors, grid):
    """R_t along every stored path, (n_paths, n_points, n_groups).

    Trajectories are rebuilt from each path with the parameters of the
    iteration it was recorded at.
    """
    paths, _ = chain.kept_paths()
    iters = chain.path_iters[chain.path_iters >= chain.burn_in]
    out = np.empty(paths.shape)
    for row, (it, x) in enumerate(zip(iters, paths)):
        p = from_unconstrained(chain.unconstrained[it], priors)
        path = LatentPath(grid=grid, x=x, kind="given")
        traj = propagate_ode(p.initial_compartments(), path, p, grid)
        out[row] = effective_reproduction(path.beta, traj.S, p.gamma, np.asarray(p.population)[None, :])
    return out


def posterior_bands(chain, priors=None, grid=None):
    """Pointwise bands of beta_t, R_t (when ``priors`` and ``grid`` are given) and incidence.

    Args:
        chain (ChainOutput):
            chain with stored smoothing draws
        priors (PriorSpec | None):
            prior spec of the chain
        grid (TimeGrid | None):
            Euler grid of the stored paths

    Returns:
        pl.DataFrame: quantity, group, time, mean and the reporting quantiles
    """
    paths, incidence = chain.kept_paths()
    if paths.shape[0] == 0:
        raise DomainError("chain", "no smoothing paths stored after burn-in")
    labels = [label or "all" for label in group_labels(paths.shape[2])]
    frames = [
        band_frame("beta", chain.path_times, np.exp(paths), labels),
        band_frame("incidence", chain.obs_times, incidence, labels),
    ]
    if priors is not None and grid is not None:
        try:
            frames.append(band_frame("R_t", chain.path_times, reproduction_draws(chain, priors, grid), labels))
        except NumericalError as err:
            logger.warning(f"R_t bands skipped: {err}")
    return pl.concat(frames)


def _time_index(times, t):
    times = np.asarray(times)
    if times.shape[0] == 0 or not times[0] <= t <= times[-1]:
        raise DomainError("t", f"day {t} lies outside the window of the stored paths")
    return int(np.argmin(np.abs(times - t)))


def beta_difference_analysis(chain, t_a, t_b, group=0):
    """Posterior of beta(t_b) - beta(t_a) over the stored smoothing draws.

    Args:
        chain (ChainOutput):
            chain with stored smoothing draws
        t_a, t_b (float):
            days inside the data window
        group (int):
            group index in the two-group model

    Returns:
        dict: ``mean`` and the reporting quantiles
    """
    paths, _ = chain.kept_paths()
    if paths.shape[0] == 0:
        raise DomainError("chain", "no smoothing paths stored after burn-in")
    i_a = _time_index(chain.path_times, t_a)
    i_b = _time_index(chain.path_times, t_b)
    diff = np.exp(paths[:, i_b, group]) - np.exp(paths[:, i_a, group])
    return {name: float(value) for name, value in quantile_summary(diff).items()}


def parameter_table(chain):
    """Posterior mean and quantiles of every constrained column after burn-in."""
    kept = chain.kept()
    if kept.shape[0] == 0:
        raise DomainError("chain", "no draws after burn-in")
    summary = quantile_summary(kept)
    return pl.DataFrame({"name": chain.names, **{name: values for name, values in summary.items()}})
