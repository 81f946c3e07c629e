"""SEIR state-space model.

Adapts the compartment and driver kernels to the interface the particle
filters work with. Particles are (n, n_groups, 7) arrays holding
S, E, I, R, pending incidence z, x = log(beta) and the iBM slope v.

"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from epidiff.dynamics.drivers import LatentPath
from epidiff.dynamics.kernels import propagate_interval
from epidiff.dynamics.ode import propagate_ode
from epidiff.model.params import ParamBatch
from epidiff.model.params import ParamSet
from epidiff.model.structure import group_labels
from epidiff.observation.lognormal import log_obs_density
from epidiff.utils.errors import DomainError
from epidiff.utils.logging import get_logger

logger = get_logger(__name__)

Z, X, V = 4, 5, 6


class Transition(NamedTuple):
    """Particles after one interval, the driver values they passed through, and
    a log-weight penalty (-inf for particles whose integration failed)."""

    particles: np.ndarray
    segment: np.ndarray
    log_penalty: np.ndarray


class SEIRStateSpace:
    """Diffusion-driven SEIR observed through weekly log-normal case counts.

    Args:
        model (ModelSpec):
            model and driver kind
        params (ParamSet | ParamBatch):
            one parameter set shared by all particles, or one per particle
        data (ObservationSeries):
            weekly counts, one column per group
        grid (TimeGrid):
            Euler grid whose observation times match the data
    """

    def __init__(self, model, params, data, grid):
        if data.n_obs != grid.n_obs or not np.allclose(data.times, grid.obs_times):
            raise DomainError("grid", "observation times of the grid and the data differ")
        if data.n_groups != model.n_groups:
            raise DomainError("data", f"{data.n_groups} data columns for a {model.n_groups}-group model")
        self.model = model
        self.data = data
        self.grid = grid
        self.params = params if isinstance(params, ParamSet) else None
        self._batch = params if isinstance(params, ParamBatch) else None
        if model.driver == "sigmoid":
            self._x_given = np.repeat(model.sigmoid.log_beta(grid.points)[:, None], model.n_groups, axis=1)
        else:
            self._x_given = np.zeros((grid.n_points, model.n_groups))

    @property
    def n_obs(self):
        return self.grid.n_obs

    @property
    def n_groups(self):
        return self.model.n_groups

    def set_batch(self, batch):
        """Per-particle parameters for the next transition / weighting."""
        self._batch = batch

    def batch(self, n):
        if self._batch is None or self._batch.size != n:
            if self.params is None:
                raise DomainError("params", f"parameter batch of size {self._batch.size} used with {n} particles")
            self._batch = ParamBatch.from_params(self.params, n)
        return self._batch

    def init_particles(self, n, rng):
        batch = self.batch(n)
        particles = np.zeros((n, self.n_groups, 7))
        particles[:, :, :4] = batch.initial_compartments()
        particles[:, :, X] = np.log(batch.beta0) if self.model.driver != "sigmoid" else self._x_given[0]
        particles[:, :, V] = batch.slope0[:, None]
        return particles

    def initial_latent(self, particles):
        return particles[:, :, X]

    def transition(self, particles, i, rng):
        n = particles.shape[0]
        batch = self.batch(n)
        steps = self.grid.steps_per_interval
        deltas = np.full(steps, self.grid.interval_deltas[i])
        noise = rng.standard_normal((n, steps, self.n_groups))
        comp, x, v, incidence, x_path, _, unstable = propagate_interval(
            np.ascontiguousarray(particles[:, :, :4]),
            np.ascontiguousarray(particles[:, :, X]),
            np.ascontiguousarray(particles[:, :, V]),
            noise,
            deltas,
            self.model.driver_code,
            batch.k,
            batch.gamma,
            batch.b,
            batch.sigma,
            batch.ou_rate,
            batch.ou_mean,
            batch.population,
            self._x_given[self.grid.interval_slice(i)],
            False,
        )
        new = np.empty_like(particles)
        new[:, :, :4] = comp
        new[:, :, Z] = incidence
        new[:, :, X] = x
        new[:, :, V] = v
        if unstable.any():
            logger.debug(f"interval {i}: {int(unstable.sum())} particles left the Euler stability region")
        return Transition(new, x_path, np.where(unstable, -np.inf, 0.0))

    def log_weights(self, particles, i):
        batch = self.batch(particles.shape[0])
        log_alpha = np.zeros(particles.shape[0])
        for g, y in enumerate(self.data.values[i]):
            if not np.isnan(y):
                log_alpha += log_obs_density(y, particles[:, g, Z], batch.tau, batch.c)
        return log_alpha

    def summary_names(self):
        names = []
        for label in group_labels(self.n_groups):
            suffix = f"_{label}" if label else ""
            names += [f"{q}{suffix}" for q in ("beta", "S", "E", "I", "R", "incidence")]
        return names

    def summarise(self, particles):
        """(n, q) quantities whose weighted means form the filtering summary."""
        columns = []
        for g in range(self.n_groups):
            columns += [np.exp(particles[:, g, X])] + [particles[:, g, c] for c in range(5)]
        return np.column_stack(columns)

    def reconstruct(self, x_path):
        """Latent path and compartment trajectory implied by driver values ``x_path``."""
        if self.params is None:
            raise DomainError("params", "trajectories can only be rebuilt for a single parameter set")
        path = LatentPath(grid=self.grid, x=x_path, kind=self.model.driver)
        return path, propagate_ode(self.params.initial_compartments(), path, self.params, self.grid)
