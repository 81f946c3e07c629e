"""Latent drivers.

Diffusions for x = log(beta) on the Euler grid: Brownian motion, integrated
Brownian motion, Ornstein–Uhlenbeck, and the deterministic sigmoid curve used
to generate data with a known decreasing contact rate.

"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from epidiff.dynamics.kernels import driver_path
from epidiff.model.structure import DRIVER_CODES
from epidiff.model.structure import SigmoidSpec
from epidiff.utils.errors import DomainError
from epidiff.utils.rng import make_rng


@dataclass(frozen=True, eq=False)
class LatentPath:
    """Driver values at every grid point, shape (n_points, n_groups)."""

    grid: object
    x: np.ndarray
    kind: str

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        object.__setattr__(self, "x", x)
        if x.shape[0] != self.grid.n_points:
            raise DomainError("x", f"path has {x.shape[0]} points, grid has {self.grid.n_points}")

    @property
    def beta(self):
        return np.exp(self.x)

    @property
    def n_groups(self):
        return self.x.shape[1]

    def at_obs(self):
        """Driver values at the observation times, (n_obs, n_groups)."""
        return self.x[self.grid.obs_index]


def simulate_driver(kind, params, grid, rng_seed=None, sigmoid=None):
    """Draw a driver path from the Euler–Maruyama transition kernel.

    Args:
        kind (str):
            one of ``bm``, ``ibm``, ``ou``, ``sigmoid``
        params (ParamSet):
            supplies x0 = log(beta0), sigma and the OU / iBM parameters
        grid (TimeGrid):
            Euler grid
        rng_seed (int | np.random.Generator | None):
            seed or stream
        sigmoid (SigmoidSpec | None):
            curve for the ``sigmoid`` kind

    Returns:
        LatentPath
    """
    if kind not in DRIVER_CODES:
        raise DomainError("kind", f"unknown driver {kind}")
    if kind == "sigmoid":
        sigmoid = sigmoid or SigmoidSpec()
        x = np.repeat(sigmoid.log_beta(grid.points)[:, None], params.n_groups, axis=1)
        return LatentPath(grid=grid, x=x, kind=kind)
    rng = make_rng(rng_seed)
    deltas = grid.deltas
    noise = rng.standard_normal((deltas.shape[0], params.n_groups))
    x = driver_path(
        params.x0,
        np.full(params.n_groups, params.slope0),
        noise,
        deltas,
        DRIVER_CODES[kind],
        np.asarray(params.sigma, dtype=np.float64),
        float(params.ou_rate),
        float(params.ou_mean),
    )
    return LatentPath(grid=grid, x=x, kind=kind)


def quadratic_variation(path):
    """Sum of squared increments of x; a float for one group, else one per group."""
    if path.x.shape[0] < 2:
        raise DomainError("path", "need at least two grid points")
    qv = np.sum(np.diff(path.x, axis=0) ** 2, axis=0)
    return float(qv[0]) if qv.shape[0] == 1 else qv


def slope_path(path):
    """Increments of x divided by the step, the slope process of an iBM path."""
    return np.diff(path.x, axis=0) / path.grid.deltas[:, None]
