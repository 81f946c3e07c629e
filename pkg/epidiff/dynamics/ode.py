"""Compartment integration.

Forward Euler for the SEIR compartments given a driver path. Incidence
k * E is accumulated by the same rule and reset at every observation time.

"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from epidiff.dynamics.kernels import propagate_interval
from epidiff.utils.configs.constants import CLAMP_TOL
from epidiff.utils.errors import DomainError
from epidiff.utils.errors import IntegrationError


@dataclass(frozen=True, eq=False)
class StateTrajectory:
    """Compartments (n_points, n_groups, 4) and weekly incidence (n_obs, n_groups)."""

    grid: object
    compartments: np.ndarray
    incidence: np.ndarray

    @property
    def S(self):
        return self.compartments[..., 0]

    @property
    def E(self):
        return self.compartments[..., 1]

    @property
    def I(self):  # noqa: E743
        return self.compartments[..., 2]

    @property
    def R(self):
        return self.compartments[..., 3]

    @property
    def n_groups(self):
        return self.compartments.shape[1]


def _as_compartments(v0, population):
    v0 = np.asarray(v0, dtype=np.float64)
    if v0.ndim == 1:
        v0 = v0[None, :]
    if v0.shape[-1] != 4:
        raise DomainError("v0", f"expected S, E, I, R per group, got shape {v0.shape}")
    if np.any(v0 < 0):
        raise DomainError("v0", "compartments must be non-negative")
    if np.any(np.abs(v0.sum(axis=1) - population) > CLAMP_TOL * population):
        raise DomainError("v0", f"compartments must sum to the population {population}")
    return v0


def propagate_ode(v0, beta_segment, params, grid=None):
    """Integrate the compartments along a driver path.

    Args:
        v0 (np.ndarray):
            (n_groups, 4) or (4,) initial S, E, I, R in persons
        beta_segment (LatentPath):
            driver values on the grid; x = log(beta)
        params (ParamSet):
            supplies k, gamma, b and the population
        grid (TimeGrid | None):
            defaults to the path's grid

    Returns:
        StateTrajectory
    """
    grid = grid or beta_segment.grid
    population = np.asarray(params.population, dtype=np.float64)
    comp = _as_compartments(v0, population)[None, ...]
    x_all = beta_segment.x
    n_groups = comp.shape[1]
    if x_all.shape != (grid.n_points, n_groups):
        raise DomainError("beta_segment", f"path shape {x_all.shape} does not cover the grid ({grid.n_points}, {n_groups})")
    one = np.ones(1)
    k = one * params.k
    gamma = one * params.gamma
    b = one * params.b
    zeros = np.zeros(1)
    sigma = np.zeros((1, n_groups))
    pop = population[None, :]
    x = x_all[0][None, :].copy()
    v = np.zeros((1, n_groups))
    steps = grid.steps_per_interval
    compartments = [comp[0][None, ...]]
    incidence = np.zeros((grid.n_obs, n_groups))
    for i, delta in enumerate(grid.interval_deltas):
        noise = np.zeros((1, steps, n_groups))
        deltas = np.full(steps, delta)
        x_given = x_all[grid.interval_slice(i)]
        comp, x, v, inc, _, comp_path, unstable = propagate_interval(
            comp, x, v, noise, deltas, 3, k, gamma, b, sigma, zeros, zeros, pop, x_given, True
        )
        if unstable[0]:
            raise IntegrationError(
                f"compartment fell below -{CLAMP_TOL:g} N in observation interval {i}; reduce the Euler step (currently {delta:g} days)"
            )
        compartments.append(comp_path[0])
        incidence[i] = inc[0]
    return StateTrajectory(grid=grid, compartments=np.concatenate(compartments, axis=0), incidence=incidence)
