"""Time grid.

Observation times with ``m`` Euler substeps inserted in every observation
interval, so interval i is covered by m + 1 steps of length
(t_i - t_{i-1}) / (m + 1).

"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from epidiff.utils.errors import DomainError


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Observation times refined by ``substeps`` Euler points per interval."""

    t0: float
    obs_times: np.ndarray
    substeps: int

    def __post_init__(self):
        obs_times = np.asarray(self.obs_times, dtype=np.float64)
        object.__setattr__(self, "obs_times", obs_times)
        if obs_times.ndim != 1:
            raise DomainError("obs_times", "must be one-dimensional")
        if self.substeps < 0:
            raise DomainError("substeps", f"must be non-negative, got {self.substeps}")
        edges = np.concatenate([[self.t0], obs_times])
        if np.any(np.diff(edges) <= 0):
            raise DomainError("obs_times", "must be strictly increasing and after t0")

    @classmethod
    def from_delta(cls, t0, obs_times, delta):
        """Grid whose step is as close to ``delta`` as the intervals allow.

        Args:
            t0 (float):
                start of the epidemic in days
            obs_times (array-like):
                observation days
            delta (float):
                requested Euler step in days

        Returns:
            TimeGrid
        """
        if not delta > 0:
            raise DomainError("delta", f"must be strictly positive, got {delta}")
        obs_times = np.asarray(obs_times, dtype=np.float64)
        interval = np.diff(np.concatenate([[t0], obs_times])).max() if obs_times.size else delta
        substeps = max(int(round(interval / delta)) - 1, 0)
        return cls(t0=float(t0), obs_times=obs_times, substeps=substeps)

    @classmethod
    def regular(cls, n_obs, interval=7.0, delta=0.1, t0=0.0):
        """``n_obs`` equally spaced observations (weekly by default)."""
        return cls.from_delta(t0, t0 + interval * np.arange(1, n_obs + 1), delta)

    @property
    def n_obs(self):
        return self.obs_times.shape[0]

    @property
    def steps_per_interval(self):
        return self.substeps + 1

    @property
    def tn(self):
        return float(self.obs_times[-1]) if self.n_obs else self.t0

    @property
    def n_points(self):
        return self.n_obs * self.steps_per_interval + 1

    @property
    def interval_deltas(self):
        """Euler step of each observation interval."""
        return np.diff(np.concatenate([[self.t0], self.obs_times])) / self.steps_per_interval

    @property
    def deltas(self):
        """Length of every grid step, n_points - 1 entries."""
        return np.repeat(self.interval_deltas, self.steps_per_interval)

    @property
    def points(self):
        """Every grid time, observation times included."""
        starts = np.concatenate([[self.t0], self.obs_times[:-1]])
        offsets = np.arange(self.steps_per_interval) / self.steps_per_interval
        inner = (starts[:, None] + offsets[None, :] * (self.obs_times - starts)[:, None]).ravel()
        return np.concatenate([inner, self.obs_times[-1:]]) if self.n_obs else np.array([self.t0])

    @property
    def obs_index(self):
        """Position of each observation time in ``points``."""
        return np.arange(1, self.n_obs + 1) * self.steps_per_interval

    def interval_slice(self, i):
        """Slice of ``points`` covering observation interval ``i`` (both ends)."""
        start = i * self.steps_per_interval
        return slice(start, start + self.steps_per_interval + 1)

    def interval(self, i):
        """Single-interval grid ending at observation ``i``."""
        start = self.t0 if i == 0 else float(self.obs_times[i - 1])
        return TimeGrid(t0=start, obs_times=self.obs_times[i : i + 1], substeps=self.substeps)

    def truncate(self, n_obs):
        """Grid restricted to the first ``n_obs`` observations."""
        return TimeGrid(t0=self.t0, obs_times=self.obs_times[:n_obs], substeps=self.substeps)

    def nearest_index(self, t):
        """Grid point closest to day ``t``; errors outside [t0, tn]."""
        if not self.t0 <= t <= self.tn:
            raise DomainError("t", f"{t} lies outside the grid window [{self.t0}, {self.tn}]")
        return int(np.argmin(np.abs(self.points - t)))
