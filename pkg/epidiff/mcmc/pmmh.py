"""Particle marginal Metropolis-Hastings.

The adaptive Metropolis core driven by particle-filter likelihood estimates.
Each accepted proposal also contributes a genealogy draw of the driver path,
so the chain records joint draws of the static parameters and beta_t.

"""
from __future__ import annotations

import numpy as np

from epidiff.ekf.proposals import ProposalCovariance
from epidiff.ekf.proposals import ek_mcmc
from epidiff.ekf.proposals import ek_mode
from epidiff.mcmc.sampler import Evaluation
from epidiff.mcmc.sampler import run_adaptive_metropolis
from epidiff.model.params import flat_names
from epidiff.model.params import flatten_params
from epidiff.model.priors import log_prior
from epidiff.model.transforms import from_unconstrained
from epidiff.model.transforms import to_unconstrained
from epidiff.pfilter.particle_filter import run_particle_filter
from epidiff.pfilter.smoothing import draw_smoothing_path
from epidiff.utils.errors import DomainError
from epidiff.utils.errors import NumericalError
from epidiff.utils.logging import get_logger
from epidiff.utils.rng import make_rng

logger = get_logger(__name__)


def seed_covariance(model, data, priors, config, p_init, grid, rng_seed=None):
    """Sigma0 for the chain as chosen by ``config.mcmc.seed_cov``.

    Args:
        model (ModelSpec):
            model and driver kind
        data (ObservationSeries):
            weekly counts
        priors (PriorSpec):
            priors
        config (RunConfig):
            run settings
        p_init (ParamSet):
            initial parameters
        grid (TimeGrid):
            Euler grid
        rng_seed (int | np.random.Generator | None):
            seed or stream for EK-MCMC

    Returns:
        ProposalCovariance
    """
    kind = config.mcmc.seed_cov
    if kind == "identity" or priors.dim == 0:
        return ProposalCovariance.identity(priors.dim)
    if kind == "ek-mode":
        _, proposal = ek_mode(model, data, p_init, priors, grid, max_iter=config.mcmc.ek_mode_max_iter)
        return proposal
    return ek_mcmc(model, data, priors, config.mcmc.ek_mcmc_iters, rng_seed, p_init, grid)


def particle_target(model, data, priors, grid, filter_config):
    """v -> particle-filter log likelihood with a smoothing draw attached.

    Invalid parameters and failed filters give -inf so the proposal is rejected.
    """

    def target(v, rng):
        try:
            p = from_unconstrained(v, priors)
            result = run_particle_filter(
                model,
                p,
                data,
                filter_config.n_particles,
                grid,
                rng,
                filter_config.resampling,
                filter_config.adaptive_resampling,
                filter_config.ess_threshold,
            )
            if result.degenerate:
                return Evaluation(-np.inf)
            path, traj = draw_smoothing_path(result, rng)
        except (DomainError, NumericalError) as err:
            logger.debug(f"proposal rejected: {err}")
            return Evaluation(-np.inf)
        return Evaluation(result.loglik, (path.x, traj.incidence))

    return target


def run_pmmh(model, data, priors, config, rng_seed=None, p_init=None, grid=None, proposal=None, progress=True):
    """Adaptive PMMH for the SEIR model.

    Args:
        model (ModelSpec):
            model and driver kind
        data (ObservationSeries):
            weekly counts
        priors (PriorSpec):
            priors on the slots; point masses are held fixed
        config (RunConfig):
            particle count (``filter``), chain settings (``mcmc``) and grid
        rng_seed (int | np.random.Generator | None):
            seed or stream
        p_init (ParamSet | None):
            starting parameters, ``config.params`` by default
        grid (TimeGrid | None):
            Euler grid, built from the data and ``config.grid`` by default
        proposal (ProposalCovariance | None):
            ready Sigma0; computed from ``config.mcmc.seed_cov`` when missing
        progress (bool):
            show a progress bar

    Returns:
        ChainOutput
    """
    rng = make_rng(rng_seed)
    p_init = config.params if p_init is None else p_init
    grid = grid or config.grid.build(data.times)
    v0 = to_unconstrained(p_init, priors)
    if proposal is None:
        proposal = seed_covariance(model, data, priors, config, p_init, grid, rng)
    logger.info(
        f"PMMH: {priors.dim} sampled coordinates, {config.filter.n_particles} particles, "
        f"{config.mcmc.n_iters} iterations, Sigma0 from {proposal.tag}, adaptation {config.mcmc.adapt}"
    )
    chain = run_adaptive_metropolis(
        particle_target(model, data, priors, grid, config.filter),
        lambda v: log_prior(v, priors),
        v0,
        proposal.matrix,
        config.mcmc,
        rng,
        transform=lambda v: flatten_params(from_unconstrained(v, priors), model.driver),
        names=flat_names(model.n_groups, model.driver),
        coordinate_names=priors.coordinate_names(),
        path_times=grid.points,
        obs_times=grid.obs_times,
        progress=progress,
    )
    chain.meta.update(
        {
            "seed_cov": proposal.tag,
            "seed_cov_warning": proposal.warning,
            "sigma0": proposal.matrix.tolist(),
            "n_particles": config.filter.n_particles,
            "final_acceptance": float(chain.acc_rate[-1]) if chain.n_iters else None,
            "final_eps": float(chain.eps[-1]) if chain.n_iters else None,
        }
    )
    return chain
