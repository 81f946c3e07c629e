"""Linear-Gaussian surrogate.

AR(1) latent state observed with Gaussian noise,

    x_i = a x_{i-1} + q eps_i,    y_i = x_i + r eta_i,    x_0 ~ N(m0, p0),

with the transition split into ``substeps + 1`` exact sub-transitions so the
model behaves like a discretised diffusion whose law does not depend on the
step. It exposes the particle-filter and EKF interfaces of the SEIR model and
has an exact Kalman likelihood, which makes it the reference for the filters
and the Metropolis core.

"""
from __future__ import annotations

import numpy as np

from epidiff.dynamics.drivers import LatentPath
from epidiff.dynamics.grid import TimeGrid
from epidiff.dynamics.state_space import Transition
from epidiff.ekf.ekf import numerical_jacobian
from epidiff.utils.errors import DomainError
from epidiff.utils.rng import make_rng

LOG_2PI = np.log(2 * np.pi)


class LinearGaussianModel:
    """AR(1) state-space model.

    Args:
        y (np.ndarray):
            observations, one per unit time step
        a (float | np.ndarray):
            autoregression over one observation interval, in (0, 1]
        q (float | np.ndarray):
            transition sd over one observation interval
        r (float | np.ndarray):
            observation sd
        m0 (float):
            initial mean
        p0 (float):
            initial variance
        substeps (int):
            intermediate points per interval
    """

    def __init__(self, y, a=0.9, q=1.0, r=0.5, m0=0.0, p0=1.0, substeps=0):
        self.y = np.asarray(y, dtype=np.float64)
        self.m0 = float(m0)
        self.p0 = float(p0)
        self.substeps = int(substeps)
        self.grid = TimeGrid(t0=0.0, obs_times=np.arange(1, self.y.shape[0] + 1, dtype=np.float64), substeps=self.substeps)
        self.obs_times = self.grid.obs_times
        self.set_batch({"a": a, "q": q, "r": r})

    def set_batch(self, values):
        """Set a, q and r, scalars or one value per particle."""
        self.a = np.asarray(values["a"], dtype=np.float64)
        self.q = np.asarray(values["q"], dtype=np.float64)
        self.r = np.asarray(values["r"], dtype=np.float64)
        if np.any(self.a <= 0) or np.any(self.a > 1) or np.any(self.q <= 0) or np.any(self.r <= 0):
            raise DomainError("a", "need 0 < a <= 1 and positive q, r")

    @classmethod
    def simulate(cls, n_obs, a=0.9, q=1.0, r=0.5, m0=0.0, p0=1.0, substeps=0, rng_seed=None):
        """Draw observations from the model and return it with them."""
        rng = make_rng(rng_seed)
        x = m0 + np.sqrt(p0) * rng.standard_normal()
        y = np.empty(n_obs)
        for i in range(n_obs):
            x = a * x + q * rng.standard_normal()
            y[i] = x + r * rng.standard_normal()
        return cls(y, a=a, q=q, r=r, m0=m0, p0=p0, substeps=substeps)

    @property
    def n_obs(self):
        return self.y.shape[0]

    def _substep(self):
        steps = self.substeps + 1
        a_s = self.a ** (1.0 / steps)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(self.a < 1, (1 - a_s**2) / (1 - self.a**2), 1.0 / steps)
        return a_s, self.q * np.sqrt(ratio)

    def kalman_loglik(self):
        """Exact log likelihood by the Kalman filter."""
        a, q, r = float(self.a), float(self.q), float(self.r)
        m, p = self.m0, self.p0
        loglik = 0.0
        for y in self.y:
            m, p = a * m, a * a * p + q * q
            s = p + r * r
            loglik += -0.5 * (LOG_2PI + np.log(s) + (y - m) ** 2 / s)
            gain = p / s
            m, p = m + gain * (y - m), (1 - gain) * p
        return loglik

    # particle filter interface

    def init_particles(self, n, rng):
        return self.m0 + np.sqrt(self.p0) * rng.standard_normal((n, 1))

    def initial_latent(self, particles):
        return particles

    def transition(self, particles, i, rng):
        n = particles.shape[0]
        steps = self.substeps + 1
        a_s, q_s = self._substep()
        a_s = np.broadcast_to(a_s, (n,))[:, None]
        q_s = np.broadcast_to(q_s, (n,))[:, None]
        segment = np.empty((n, steps, 1))
        x = particles
        for s in range(steps):
            x = a_s * x + q_s * rng.standard_normal((n, 1))
            segment[:, s] = x
        return Transition(x, segment, np.zeros(n))

    def log_weights(self, particles, i):
        r = np.broadcast_to(self.r, (particles.shape[0],))
        return -0.5 * (LOG_2PI + 2 * np.log(r) + ((self.y[i] - particles[:, 0]) / r) ** 2)

    def summary_names(self):
        return ["x"]

    def summarise(self, particles):
        return particles

    def reconstruct(self, x_path):
        return LatentPath(grid=self.grid, x=x_path, kind="ar1"), None

    # EKF interface

    def initial_belief(self):
        return np.array([self.m0]), np.array([[self.p0]])

    def predict(self, m, P, i):
        a_s, q_s = self._substep()
        a_s, q_s = float(a_s), float(q_s)
        for _ in range(self.substeps + 1):
            jac = numerical_jacobian(lambda s: a_s * s, m)
            m = a_s * m
            P = jac @ P @ jac.T + np.array([[q_s**2]])
        return m, P

    def linearise_observation(self, m, i):
        return self.y[i : i + 1], m.copy(), np.eye(1), np.array([[float(self.r) ** 2]])

    def reset(self, m, P):
        return m, P
