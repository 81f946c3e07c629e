"""Bootstrap particle filter.

Generic over state-space models exposing ``init_particles``,
``initial_latent``, ``transition``, ``log_weights``, ``summarise``,
``summary_names`` and ``reconstruct`` (see ``SEIRStateSpace`` and
``LinearGaussianModel``). Weights are kept in log space and the likelihood
estimate accumulates log(sum_j W_j alpha_j) at every observation.

"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from epidiff.dynamics.state_space import SEIRStateSpace
from epidiff.pfilter.resampling import effective_sample_size
from epidiff.pfilter.resampling import resample
from epidiff.utils.errors import DomainError
from epidiff.utils.logging import get_logger
from epidiff.utils.rng import make_rng

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class FilterResult:
    """Output of one filter run.

    ``parents[i][j]`` is the index, among the particles of observation i - 1,
    of the ancestor of particle j at observation i (identity for i = 0).
    ``segments[i]`` holds the driver values each particle passed through in
    interval i, shape (n, steps, n_groups).
    """

    loglik: float
    degenerate: bool
    loglik_increments: np.ndarray
    filter_means: np.ndarray
    summary_names: list
    ess: np.ndarray
    final_log_weights: np.ndarray
    final_particles: np.ndarray
    initial_latent: np.ndarray
    segments: list | None
    parents: list
    model: object
    n_particles: int

    @property
    def final_weights(self):
        return np.exp(self.final_log_weights)


def particle_filter(
    model,
    n_particles,
    rng_seed=None,
    resampling="systematic",
    adaptive_resampling=False,
    ess_threshold=0.5,
    store_paths=True,
    conditional=False,
):
    """Run the bootstrap filter on a state-space model.

    Args:
        model (object):
            state-space model
        n_particles (int):
            number of particles, at least 1
        rng_seed (int | np.random.Generator | None):
            seed or stream
        resampling (str):
            ``systematic`` or ``multinomial``
        adaptive_resampling (bool):
            resample only when the ESS drops below ``ess_threshold * n``
            instead of after every observation
        ess_threshold (float):
            fraction of particles for adaptive resampling
        store_paths (bool):
            keep driver segments and ancestry for path draws
        conditional (bool):
            particle 0 is a reference path that always survives resampling
            (conditional SMC); the model is expected to pin its state

    Returns:
        FilterResult
    """
    if n_particles < 1:
        raise DomainError("n_particles", f"need at least one particle, got {n_particles}")
    rng = make_rng(rng_seed)
    n = n_particles
    n_obs = model.n_obs
    particles = model.init_particles(n, rng)
    initial_latent = model.initial_latent(particles).copy()
    log_w = np.full(n, -np.log(n))
    parents_i = np.arange(n)
    loglik = 0.0
    increments = np.full(n_obs, np.nan)
    means = np.full((n_obs, len(model.summary_names())), np.nan)
    ess = np.full(n_obs, np.nan)
    segments = [] if store_paths else None
    parents = []

    def result(degenerate):
        return FilterResult(
            loglik=-np.inf if degenerate else loglik,
            degenerate=degenerate,
            loglik_increments=increments,
            filter_means=means,
            summary_names=model.summary_names(),
            ess=ess,
            final_log_weights=log_w,
            final_particles=particles,
            initial_latent=initial_latent,
            segments=segments,
            parents=parents,
            model=model,
            n_particles=n,
        )

    for i in range(n_obs):
        transition = model.transition(particles, i, rng)
        particles = transition.particles
        parents.append(parents_i)
        if store_paths:
            segments.append(transition.segment)
        log_alpha = model.log_weights(particles, i) + transition.log_penalty
        log_alpha[np.isnan(log_alpha)] = -np.inf
        increment = logsumexp(log_w + log_alpha)
        if not np.isfinite(increment):
            logger.debug(f"filter degenerate at observation {i}")
            return result(True)
        log_w = log_w + log_alpha - increment
        loglik += increment
        increments[i] = increment
        w = np.exp(log_w)
        means[i] = w @ model.summarise(particles)
        ess[i] = effective_sample_size(log_w)
        if adaptive_resampling and ess[i] >= ess_threshold * n and i < n_obs - 1:
            parents_i = np.arange(n)
            continue
        idx = resample(w, n, resampling, rng)
        if conditional:
            idx[0] = 0
        if i < n_obs - 1:
            particles = particles[idx]
            log_w = np.full(n, -np.log(n))
        parents_i = idx
    return result(False)


def run_particle_filter(
    model,
    p,
    data,
    n_particles,
    grid=None,
    rng_seed=None,
    resampling="systematic",
    adaptive_resampling=False,
    ess_threshold=0.5,
    store_paths=True,
    delta=0.1,
):
    """Particle filter for the SEIR model at parameters ``p``.

    Args:
        model (ModelSpec):
            model and driver kind
        p (ParamSet | ParamBatch):
            static parameters
        data (ObservationSeries):
            weekly counts
        n_particles (int):
            number of particles
        grid (TimeGrid | None):
            Euler grid; built from ``delta`` when missing
        rng_seed (int | np.random.Generator | None):
            seed or stream
        resampling (str):
            ``systematic`` or ``multinomial``
        adaptive_resampling (bool):
            ESS-triggered resampling
        ess_threshold (float):
            ESS fraction triggering a resample
        store_paths (bool):
            keep what path draws need
        delta (float):
            Euler step in days when ``grid`` is not given

    Returns:
        FilterResult
    """
    grid = grid or data.grid(delta)
    state_space = SEIRStateSpace(model, p, data, grid)
    return particle_filter(state_space, n_particles, rng_seed, resampling, adaptive_resampling, ess_threshold, store_paths)
