"""Data-augmentation Gibbs for the driver volatility.

Alternates a conditional-SMC update of the driver path given sigma with a
random-walk Metropolis update of sigma given the path. The path is held fixed
in one of three parametrisations:

  - ``centred``: x itself; the sigma update only sees the quadratic variation
    of x, which pins sigma down and makes the chain crawl.
  - ``lamperti``: u = (x - x0) / sigma; proposing sigma rescales the path and
    the data likelihood enters the acceptance ratio.
  - ``chib``: the driving-noise increments; equal to the Lamperti scheme for
    the Brownian driver.

All other parameters are held fixed.

"""
from __future__ import annotations

import numpy as np
from tqdm import tqdm

from epidiff.dynamics.drivers import LatentPath
from epidiff.dynamics.ode import propagate_ode
from epidiff.dynamics.state_space import X
from epidiff.dynamics.state_space import Z
from epidiff.dynamics.state_space import SEIRStateSpace
from epidiff.dynamics.state_space import Transition
from epidiff.gibbs.reparam import _drift
from epidiff.gibbs.reparam import chib_inverse
from epidiff.gibbs.reparam import chib_reparam
from epidiff.gibbs.reparam import girsanov_logdensity
from epidiff.gibbs.reparam import lamperti_inverse
from epidiff.gibbs.reparam import lamperti_transform
from epidiff.mcmc.adaptation import adapt_scale
from epidiff.mcmc.sampler import ChainOutput
from epidiff.model.priors import build_prior_spec
from epidiff.model.priors import log_prior
from epidiff.model.priors import vague_positive_normal
from epidiff.observation.lognormal import log_obs_density
from epidiff.pfilter.particle_filter import particle_filter
from epidiff.pfilter.smoothing import draw_smoothing_path
from epidiff.utils.errors import DegenerateFilterError
from epidiff.utils.errors import DomainError
from epidiff.utils.errors import NumericalError
from epidiff.utils.logging import get_logger
from epidiff.utils.rng import make_rng

logger = get_logger(__name__)

PARAMETRISATIONS = ("lamperti", "chib", "centred")


class ConditionedStateSpace:
    """SEIR state space whose particle 0 follows a fixed reference path."""

    def __init__(self, state_space, reference, trajectory):
        self.state_space = state_space
        self.reference = reference
        self.trajectory = trajectory
        self.grid = state_space.grid

    @property
    def n_obs(self):
        return self.state_space.n_obs

    def init_particles(self, n, rng):
        particles = self.state_space.init_particles(n, rng)
        particles[0, :, X] = self.reference[0]
        return particles

    def initial_latent(self, particles):
        return self.state_space.initial_latent(particles)

    def transition(self, particles, i, rng):
        step = self.state_space.transition(particles, i, rng)
        steps = self.grid.steps_per_interval
        end = self.grid.obs_index[i]
        new = step.particles.copy()
        new[0, :, :4] = self.trajectory.compartments[end]
        new[0, :, Z] = self.trajectory.incidence[i]
        new[0, :, X] = self.reference[end]
        segment = step.segment.copy()
        segment[0] = self.reference[i * steps + 1 : end + 1]
        penalty = step.log_penalty.copy()
        penalty[0] = 0.0
        return Transition(new, segment, penalty)

    def log_weights(self, particles, i):
        return self.state_space.log_weights(particles, i)

    def summary_names(self):
        return self.state_space.summary_names()

    def summarise(self, particles):
        return self.state_space.summarise(particles)

    def reconstruct(self, x_path):
        return self.state_space.reconstruct(x_path)


def data_loglik(trajectory, data, p):
    """log p(y | trajectory), missing weeks skipped."""
    total = 0.0
    for g in range(data.n_groups):
        y = data.values[:, g]
        seen = ~np.isnan(y)
        total += np.sum(log_obs_density(y[seen], trajectory.incidence[seen, g], p.tau, p.c))
    return float(total)


def path_logdensity(path, p, driver="bm"):
    """Euler transition log density of a driver path given its volatility."""
    x = path.x
    deltas = path.grid.deltas[:, None]
    var = np.asarray(p.sigma, dtype=np.float64) ** 2 * deltas
    resid = x[1:] - x[:-1] - deltas * _drift(x[:-1], p, driver)
    return float(-0.5 * np.sum(np.log(2 * np.pi * var) + resid**2 / var))


def _fixed_path(path, p, parametrisation, driver):
    if parametrisation == "lamperti":
        return lamperti_transform(path, p)
    if parametrisation == "chib":
        return chib_reparam(path, p, driver)
    return path


def _path_at(fixed, p, parametrisation, driver):
    """Driver path implied by the fixed coordinates at parameters ``p``."""
    if parametrisation == "lamperti":
        return lamperti_inverse(fixed, p, driver)
    if parametrisation == "chib":
        return chib_inverse(fixed, p, driver)
    return fixed


def _sigma_terms(fixed, p, parametrisation, driver, data):
    """Parts of the sigma full conditional that depend on the parametrisation.

    Returns:
        tuple: log target (without prior), data log likelihood, path, trajectory
    """
    path = _path_at(fixed, p, parametrisation, driver)
    trajectory = propagate_ode(p.initial_compartments(), path, p, path.grid)
    loglik = data_loglik(trajectory, data, p)
    if parametrisation == "lamperti":
        return loglik + girsanov_logdensity(fixed, p, driver), loglik, path, trajectory
    if parametrisation == "chib":
        return loglik, loglik, path, trajectory
    return path_logdensity(path, p, driver), loglik, path, trajectory


def run_particle_gibbs_reparam(model, data, config, rng_seed=None, p_init=None, grid=None, progress=True):
    """Particle Gibbs for sigma with the path held in a chosen parametrisation.

    Args:
        model (ModelSpec):
            single-group model with a Brownian or OU driver
        data (ObservationSeries):
            weekly counts; NaN weeks carry no information
        config (RunConfig):
            ``gibbs`` section plus the fixed parameters and the sigma prior
        rng_seed (int | np.random.Generator | None):
            seed or stream
        p_init (ParamSet | None):
            fixed parameters and the starting sigma, ``config.params`` by default
        grid (TimeGrid | None):
            Euler grid
        progress (bool):
            show a progress bar

    Returns:
        ChainOutput: sigma draws
    """
    settings = config.gibbs
    parametrisation = settings.parametrisation
    if parametrisation not in PARAMETRISATIONS:
        raise DomainError("parametrisation", f"unknown parametrisation {parametrisation}")
    if model.n_groups != 1 or model.driver not in ("bm", "ou"):
        raise DomainError("model", "particle Gibbs needs a single-group model with a bm or ou driver")
    rng = make_rng(rng_seed)
    p = config.params if p_init is None else p_init
    if not p.sigma[0] > 0:
        raise DomainError("sigma", "the chain needs a strictly positive starting volatility")
    grid = grid or config.grid.build(data.times)
    spec = build_prior_spec(p, model.driver, {"sigma": config.priors.get("sigma", vague_positive_normal())})
    driver = model.driver
    log_sigma = float(np.log(p.sigma[0]))
    logprior = log_prior(np.array([log_sigma]), spec)

    result = particle_filter(SEIRStateSpace(model, p, data, grid), settings.n_particles, rng)
    if result.degenerate:
        raise DegenerateFilterError("particle filter is degenerate at the initial parameters")
    path, trajectory = draw_smoothing_path(result, rng)

    n = settings.n_iters
    draws = np.empty((n, 1))
    logliks = np.empty(n)
    logpriors = np.empty(n)
    accepted = np.zeros(n, dtype=bool)
    acc_rate = np.empty(n)
    eps_trace = np.empty(n)
    path_iters, paths, incidence = [], [], []
    eps = 1.0
    n_accepted = 0
    loglik = data_loglik(trajectory, data, p)
    for it in tqdm(range(n), disable=not progress, desc=f"gibbs-{parametrisation}"):
        # path | sigma
        conditioned = ConditionedStateSpace(SEIRStateSpace(model, p, data, grid), path.x, trajectory)
        result = particle_filter(conditioned, settings.n_particles, rng, conditional=True)
        if result.degenerate:
            raise DegenerateFilterError(f"conditional filter degenerate at iteration {it}")
        path, trajectory = draw_smoothing_path(result, rng)
        loglik = data_loglik(trajectory, data, p)

        # sigma | path
        fixed = _fixed_path(path, p, parametrisation, driver)
        current, _, _, _ = _sigma_terms(fixed, p, parametrisation, driver, data)
        proposal = log_sigma + settings.step0 * np.sqrt(eps) * rng.standard_normal()
        p_new = p.replace(sigma=(float(np.exp(proposal)),))
        logprior_new = log_prior(np.array([proposal]), spec)
        try:
            target_new, loglik_new, path_new, trajectory_new = _sigma_terms(fixed, p_new, parametrisation, driver, data)
            log_ratio = target_new + logprior_new - current - logprior
        except NumericalError:
            log_ratio = -np.inf
        if np.log(rng.uniform()) < log_ratio:
            p, log_sigma, logprior = p_new, proposal, logprior_new
            path, trajectory, loglik = path_new, trajectory_new, loglik_new
            n_accepted += 1
            accepted[it] = True
        if settings.adapt:
            eps = adapt_scale(eps, n_accepted / (it + 1), it + 1)

        draws[it, 0] = p.sigma[0]
        logliks[it] = loglik
        logpriors[it] = logprior
        acc_rate[it] = n_accepted / (it + 1)
        eps_trace[it] = eps
        if (it + 1) % settings.thin == 0:
            path_iters.append(it)
            paths.append(path.x)
            incidence.append(trajectory.incidence)

    logger.info(f"particle Gibbs ({parametrisation}) finished: sigma acceptance {n_accepted / max(n, 1):.3f}")
    return ChainOutput(
        names=["sigma"],
        draws=draws,
        coordinate_names=["log_sigma"],
        unconstrained=np.log(draws),
        loglik=logliks,
        logprior=logpriors,
        accepted=accepted,
        acc_rate=acc_rate,
        eps=eps_trace,
        burn_in=min(settings.burn_in, n),
        path_iters=np.asarray(path_iters, dtype=np.int64),
        paths=np.asarray(paths) if paths else np.zeros((0, 0, 0)),
        incidence=np.asarray(incidence) if incidence else np.zeros((0, 0, 0)),
        path_times=grid.points,
        obs_times=grid.obs_times,
        meta={"parametrisation": parametrisation, "n_particles": settings.n_particles},
    )
