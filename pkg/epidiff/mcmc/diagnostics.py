"""Chain diagnostics.

Effective sample size by Geyer's initial positive sequence and the deviance
information criterion.

"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import polars as pl
from statsmodels.tsa.stattools import acf

from epidiff.model.transforms import from_unconstrained
from epidiff.pfilter.particle_filter import run_particle_filter
from epidiff.utils.errors import DegenerateFilterError
from epidiff.utils.errors import DomainError
from epidiff.utils.logging import get_logger

logger = get_logger(__name__)

MIN_LENGTH = 10


def _efficiency(x):
    n = x.shape[0]
    if np.var(x) == 0:
        logger.warning("ESS of a constant sequence is reported as 0")
        return 0.0
    rho = acf(x, nlags=n - 1, fft=True)
    # initial positive sequence of paired autocorrelations
    tau = -1.0
    for k in range(0, n - 1, 2):
        pair = rho[k] + rho[k + 1]
        if k > 0 and pair <= 0:
            break
        tau += 2 * pair
    # antithetic chains may exceed one draw per draw, up to log10(n)
    return float(1.0 / max(tau, 1.0 / np.log10(n)))


def ess(draws):
    """Per-draw efficiency ESS / n; the minimum over columns for a 2-D input.

    Args:
        draws (np.ndarray):
            (n,) or (n, d) draws, n >= 10

    Returns:
        float
    """
    draws = np.asarray(draws, dtype=np.float64)
    if draws.shape[0] < MIN_LENGTH:
        raise DomainError("draws", f"need at least {MIN_LENGTH} draws, got {draws.shape[0]}")
    if draws.ndim == 1:
        return _efficiency(draws)
    return min(_efficiency(draws[:, j]) for j in range(draws.shape[1]))


def ess_table(chain, columns=None):
    """Efficiency and effective count of every sampled column after burn-in.

    Args:
        chain (ChainOutput):
            recorded chain
        columns (list[str] | None):
            constrained columns to report; all non-constant ones by default

    Returns:
        pl.DataFrame: columns name, efficiency, ess
    """
    kept = chain.kept()
    if columns is None:
        columns = [name for j, name in enumerate(chain.names) if np.ptp(chain.draws[:, j]) > 0]
    rows = []
    for name in columns:
        efficiency = ess(kept[:, chain.names.index(name)])
        rows.append({"name": name, "efficiency": efficiency, "ess": efficiency * kept.shape[0]})
    return pl.DataFrame(rows, schema={"name": pl.Utf8, "efficiency": pl.Float64, "ess": pl.Float64})


@dataclass(frozen=True)
class DICResult:
    """DIC = mean deviance + p_D."""

    dic: float
    mean_deviance: float
    deviance_at_mean: float
    p_d: float


def deviance_information(chain, loglik_fn):
    """DIC from the recorded log likelihoods and one evaluation at the posterior mean.

    Args:
        chain (ChainOutput):
            recorded chain
        loglik_fn (Callable[[np.ndarray], float]):
            log likelihood at an unconstrained vector

    Returns:
        DICResult
    """
    kept = chain.kept(chain.loglik)
    if kept.shape[0] == 0:
        raise DomainError("chain", "no draws after burn-in")
    mean_deviance = float(-2 * kept.mean())
    theta_bar = chain.kept(chain.unconstrained).mean(axis=0)
    deviance_at_mean = -2 * loglik_fn(theta_bar)
    p_d = mean_deviance - deviance_at_mean
    return DICResult(dic=mean_deviance + p_d, mean_deviance=mean_deviance, deviance_at_mean=deviance_at_mean, p_d=p_d)


def dic(chain, model, data, n_particles, rng_seed=None, priors=None, grid=None, delta=0.1):
    """DIC with deviances from particle-filter likelihood estimates.

    Args:
        chain (ChainOutput):
            PMMH output
        model (ModelSpec):
            model the chain was run on
        data (ObservationSeries):
            weekly counts
        n_particles (int):
            particles for the filter at the posterior mean
        rng_seed (int | np.random.Generator | None):
            seed or stream
        priors (PriorSpec):
            prior spec of the chain, maps coordinates to parameters
        grid (TimeGrid | None):
            Euler grid
        delta (float):
            Euler step when ``grid`` is missing

    Returns:
        DICResult
    """
    if priors is None:
        raise DomainError("priors", "needed to map the posterior mean back to parameters")

    def loglik_fn(theta_bar):
        result = run_particle_filter(model, from_unconstrained(theta_bar, priors), data, n_particles, grid, rng_seed, store_paths=False, delta=delta)
        if result.degenerate:
            raise DegenerateFilterError("particle filter is degenerate at the posterior mean")
        return result.loglik

    out = deviance_information(chain, loglik_fn)
    logger.info(f"DIC {out.dic:.2f} (mean deviance {out.mean_deviance:.2f}, p_D {out.p_d:.2f})")
    return out
