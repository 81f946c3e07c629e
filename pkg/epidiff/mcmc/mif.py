"""Iterated filtering.

Maximum likelihood by repeated particle filtering with the parameters carried
as extra particle coordinates and perturbed by a random walk whose sd cools
geometrically from pass to pass. Perturbations act on the unconstrained scale,
so every parameter stays inside its prior support.

"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from tqdm import tqdm

from epidiff.dynamics.state_space import SEIRStateSpace
from epidiff.dynamics.state_space import Transition
from epidiff.model.transforms import decode_batch
from epidiff.model.transforms import from_unconstrained
from epidiff.model.transforms import to_unconstrained
from epidiff.pfilter.particle_filter import particle_filter
from epidiff.utils.errors import NumericalError
from epidiff.utils.logging import get_logger
from epidiff.utils.rng import make_rng

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class Swarm:
    """Model particles and the parameter vector each one carries."""

    state: np.ndarray
    theta: np.ndarray

    def __getitem__(self, idx):
        return Swarm(self.state[idx], self.theta[idx])

    def __len__(self):
        return self.theta.shape[0]


class PerturbedModel:
    """State-space model whose particles carry randomly walking parameters.

    Args:
        model (object):
            state-space model accepting per-particle parameters
        apply_theta (Callable[[object, np.ndarray], None]):
            installs an (n, d) matrix of unconstrained parameters on ``model``
        theta0 (np.ndarray):
            centre of the initial swarm
        sd (float):
            random-walk sd per observation interval
    """

    def __init__(self, model, apply_theta, theta0, sd):
        self.model = model
        self.apply_theta = apply_theta
        self.theta0 = np.asarray(theta0, dtype=np.float64)
        self.sd = float(sd)

    @property
    def n_obs(self):
        return self.model.n_obs

    def _jitter(self, theta, rng):
        if self.sd == 0:
            return theta.copy()
        return theta + self.sd * rng.standard_normal(theta.shape)

    def init_particles(self, n, rng):
        theta = self._jitter(np.tile(self.theta0, (n, 1)), rng)
        self.apply_theta(self.model, theta)
        return Swarm(self.model.init_particles(n, rng), theta)

    def initial_latent(self, swarm):
        return self.model.initial_latent(swarm.state)

    def transition(self, swarm, i, rng):
        theta = self._jitter(swarm.theta, rng)
        self.apply_theta(self.model, theta)
        step = self.model.transition(swarm.state, i, rng)
        return Transition(Swarm(step.particles, theta), step.segment, step.log_penalty)

    def log_weights(self, swarm, i):
        return self.model.log_weights(swarm.state, i)

    def summary_names(self):
        return [f"theta{j}" for j in range(self.theta0.shape[0])]

    def summarise(self, swarm):
        return swarm.theta


@dataclass(frozen=True, eq=False)
class MIFResult:
    """Final estimate with the estimate and log likelihood after each pass."""

    theta: np.ndarray
    trace: np.ndarray
    loglik: np.ndarray


def iterated_filtering(model, apply_theta, theta0, n_passes, cooling=0.95, perturb_sd=0.02, n_particles=500, rng_seed=None, progress=True):
    """Iterated filtering on a generic state-space model.

    Args:
        model (object):
            state-space model accepting per-particle parameters
        apply_theta (Callable[[object, np.ndarray], None]):
            installs an (n, d) parameter matrix on ``model``
        theta0 (np.ndarray):
            starting unconstrained vector
        n_passes (int):
            number of filter passes
        cooling (float):
            sd multiplier per pass
        perturb_sd (float):
            sd of the first pass
        n_particles (int):
            particles per pass
        rng_seed (int | np.random.Generator | None):
            seed or stream
        progress (bool):
            show a progress bar

    Returns:
        MIFResult
    """
    rng = make_rng(rng_seed)
    theta = np.asarray(theta0, dtype=np.float64).copy()
    trace = np.empty((n_passes, theta.shape[0]))
    loglik = np.full(n_passes, -np.inf)
    for m in tqdm(range(n_passes), disable=not progress, desc="mif"):
        sd = perturb_sd * cooling**m
        result = particle_filter(PerturbedModel(model, apply_theta, theta, sd), n_particles, rng, store_paths=False)
        if result.degenerate:
            logger.warning(f"pass {m}: filter degenerate, estimate kept")
        else:
            swarm = result.final_particles
            theta = theta + result.final_weights @ (swarm.theta - theta)
            loglik[m] = result.loglik
        trace[m] = theta
        logger.debug(f"pass {m}: sd {sd:.4g}, log likelihood {loglik[m]:.3f}")
    if n_passes and not np.isfinite(loglik).any():
        raise NumericalError("likelihood was not finite in any iterated filtering pass")
    return MIFResult(theta=theta, trace=trace, loglik=loglik)


def _install_batch(spec):
    def apply_theta(state_space, theta):
        state_space.set_batch(decode_batch(theta, spec))

    return apply_theta


def mif_search(model, data, spec, config, rng_seed=None, p_init=None, grid=None, delta=0.1, progress=True):
    """Iterated filtering for the SEIR model.

    Args:
        model (ModelSpec):
            model and driver kind
        data (ObservationSeries):
            weekly counts
        spec (PriorSpec):
            decides the estimated coordinates; point masses stay fixed
        config (MIFConfig):
            passes, cooling, perturbation sd and particle count
        rng_seed (int | np.random.Generator | None):
            seed or stream
        p_init (ParamSet):
            starting parameters
        grid (TimeGrid | None):
            Euler grid
        delta (float):
            Euler step when ``grid`` is missing
        progress (bool):
            show a progress bar

    Returns:
        tuple[ParamSet, MIFResult]
    """
    grid = grid or data.grid(delta)
    theta0 = to_unconstrained(p_init, spec)
    if config.perturb_sd == 0 or spec.dim == 0:
        return p_init, MIFResult(theta=theta0, trace=np.tile(theta0, (config.n_passes, 1)), loglik=np.full(config.n_passes, np.nan))
    state_space = SEIRStateSpace(model, p_init, data, grid)
    logger.info(f"iterated filtering: {config.n_passes} passes, {config.n_particles} particles, {spec.dim} coordinates")
    result = iterated_filtering(
        state_space,
        _install_batch(spec),
        theta0,
        config.n_passes,
        config.cooling,
        config.perturb_sd,
        config.n_particles,
        rng_seed,
        progress,
    )
    return from_unconstrained(result.theta, spec), result


def mif_estimate(model, data, spec, config, rng_seed=None, p_init=None, grid=None, delta=0.1, progress=True):
    """Iterated-filtering point estimate; see ``mif_search``.

    Returns:
        ParamSet
    """
    estimate, _ = mif_search(model, data, spec, config, rng_seed, p_init, grid, delta, progress)
    return estimate
