"""Log-normal observation model.

Reported weekly cases satisfy log y_i ~ Normal(log(c z_i), tau^2) where z_i is
the model incidence accumulated over week i. Densities are densities of log y.

"""
from __future__ import annotations

from dataclasses import dataclass
from dataclasses import field

import numpy as np

from epidiff.dynamics.grid import TimeGrid
from epidiff.utils.errors import DomainError
from epidiff.utils.rng import make_rng

LOG_SQRT_2PI = 0.5 * np.log(2 * np.pi)


@dataclass(frozen=True, eq=False)
class ObservationSeries:
    """Weekly case counts, (n_obs, n_groups); NaN marks a missing week."""

    times: np.ndarray
    values: np.ndarray
    groups: tuple[str, ...] = ("",)
    # factor the raw counts were multiplied by before fitting
    corrected_by: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if values.shape[0] != times.shape[0]:
            raise DomainError("values", f"{values.shape[0]} rows for {times.shape[0]} times")
        if values.shape[1] != len(self.groups):
            raise DomainError("values", f"{values.shape[1]} columns for groups {self.groups}")
        if np.any(np.diff(times) <= 0):
            raise DomainError("times", "must be strictly increasing")
        if np.any(values[~np.isnan(values)] <= 0):
            raise DomainError("values", "cases must be strictly positive (the model takes logs)")

    @property
    def n_obs(self):
        return self.times.shape[0]

    @property
    def n_groups(self):
        return self.values.shape[1]

    def grid(self, delta, t0=0.0):
        """Euler grid with step ``delta`` through the observation times."""
        return TimeGrid.from_delta(t0, self.times, delta)

    def truncate(self, cutoff):
        """Observations up to and including day ``cutoff``."""
        if self.n_obs == 0 or cutoff > self.times[-1]:
            raise DomainError("cutoff", f"day {cutoff} lies beyond the end of the data")
        keep = self.times <= cutoff
        if not keep.any():
            raise DomainError("cutoff", f"day {cutoff} precedes the first observation")
        return ObservationSeries(self.times[keep], self.values[keep], self.groups, self.corrected_by, dict(self.meta))


def log_obs_density(y, z, tau, c=1.0):
    """Log density of log ``y`` given incidence ``z``.

    Args:
        y (float | np.ndarray):
            reported cases
        z (float | np.ndarray):
            model incidence; z <= 0 gives -inf
        tau (float | np.ndarray):
            sd of log y
        c (float | np.ndarray):
            reporting factor

    Returns:
        float | np.ndarray
    """
    z = np.asarray(z, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        resid = (np.log(y) - np.log(c * z)) / tau
        out = np.where(z > 0, -np.log(tau) - LOG_SQRT_2PI - 0.5 * resid**2, -np.inf)
    return float(out) if out.ndim == 0 else out


def simulate_observations(traj, tau, c=1.0, rng_seed=None):
    """Noisy weekly cases y_i = c z_i exp(tau eps_i).

    Args:
        traj (StateTrajectory):
            trajectory holding the weekly incidence
        tau (float):
            sd of log y, 0 for noiseless data
        c (float):
            reporting factor
        rng_seed (int | np.random.Generator | None):
            seed or stream

    Returns:
        ObservationSeries
    """
    if tau < 0:
        raise DomainError("tau", f"must be non-negative, got {tau}")
    z = traj.incidence
    if np.any(z <= 0):
        week = int(np.argwhere(z <= 0)[0][0])
        raise DomainError(
            "incidence",
            f"zero incidence in week {week}; log-normal noise cannot produce cases from it, "
            "start the epidemic later or seed more initial infections",
        )
    rng = make_rng(rng_seed)
    eps = rng.standard_normal(z.shape)
    values = c * z * np.exp(tau * eps)
    groups = ("c", "a") if z.shape[1] == 2 else ("",)
    return ObservationSeries(times=traj.grid.obs_times.copy(), values=values, groups=groups)


def correct_observations(series, factor):
    """Series with every count multiplied by ``factor``."""
    if not factor > 0:
        raise DomainError("factor", f"must be strictly positive, got {factor}")
    return ObservationSeries(series.times, series.values * factor, series.groups, series.corrected_by * factor, dict(series.meta))
