"""Simulate.

Synthetic epidemics for the experiment presets: truth path, compartments and
weekly counts written next to each other

"""
from __future__ import annotations

from epidiff.data.io import write_observations
from epidiff.data.io import write_truth
from epidiff.dynamics.simulation import simulate_epidemic
from epidiff.utils.logging import get_logger
from epidiff.workflows.common import close_run
from epidiff.workflows.common import open_run

logger = get_logger(__name__)


def simulate_from_config(config, rng_seed=None, tau=None):
    """Draw the epidemic a config describes; ``simulation`` settings override the model.

    Args:
        config (RunConfig):
            resolved config
        rng_seed (int | np.random.Generator | None):
            seed or stream, ``config.seed`` by default
        tau (float | None):
            observation sd overriding the config

    Returns:
        Epidemic
    """
    sim = config.simulation
    driver = sim.driver or config.model.driver
    sigmoid = sim.sigmoid or config.model.sigmoid
    grid = config.grid.build()
    return simulate_epidemic(
        config.params,
        grid,
        driver,
        config.seed if rng_seed is None else rng_seed,
        tau=sim.tau if tau is None else tau,
        c=sim.reporting_factor,
        sigmoid=sigmoid,
    )


def simulate(config, out_dir=None):
    """Write ``observations.csv`` and the truth files of one synthetic epidemic.

    Returns:
        tuple[str, Epidemic]: run directory and the epidemic
    """
    out_dir = open_run(config, out_dir)
    epidemic = simulate_from_config(config)
    write_observations(epidemic.data, f"{out_dir}/observations.csv")
    write_truth(epidemic, out_dir)
    close_run(
        config,
        out_dir,
        "simulate",
        driver=config.simulation.driver or config.model.driver,
        peak_incidence=float(epidemic.trajectory.incidence.max()),
    )
    return out_dir, epidemic
