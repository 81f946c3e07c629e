"""Synthetic epidemics.

Driver path, compartment trajectory and noisy weekly cases drawn in one go.

"""
from __future__ import annotations

from dataclasses import dataclass

from epidiff.dynamics.drivers import simulate_driver
from epidiff.dynamics.ode import propagate_ode
from epidiff.observation.lognormal import simulate_observations
from epidiff.utils.logging import get_logger
from epidiff.utils.rng import make_rng

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class Epidemic:
    """Truth and data of one synthetic epidemic."""

    path: object
    trajectory: object
    data: object


def simulate_epidemic(params, grid, driver="bm", rng_seed=None, tau=None, c=None, sigmoid=None):
    """Simulate an epidemic and its weekly case counts.

    Args:
        params (ParamSet):
            true parameters
        grid (TimeGrid):
            Euler grid with the observation schedule
        driver (str):
            driver generating beta_t
        rng_seed (int | np.random.Generator | None):
            seed or stream
        tau (float | None):
            observation sd, ``params.tau`` by default
        c (float | None):
            reporting factor, ``params.c`` by default
        sigmoid (SigmoidSpec | None):
            curve for the sigmoid driver

    Returns:
        Epidemic
    """
    rng = make_rng(rng_seed)
    tau = params.tau if tau is None else tau
    c = params.c if c is None else c
    path = simulate_driver(driver, params, grid, rng, sigmoid)
    trajectory = propagate_ode(params.initial_compartments(), path, params, grid)
    data = simulate_observations(trajectory, tau, c, rng)
    logger.debug(f"simulated {grid.n_obs} observations, peak weekly incidence {trajectory.incidence.max():.1f}")
    return Epidemic(path=path, trajectory=trajectory, data=data)
