"""Extended Kalman filter.

Gaussian approximation of the diffusion-driven SEIR model on the augmented
state (S, E, I, R, z, x, v) per group. The mean follows the Euler map without
noise, the covariance is pushed through the central-difference Jacobian of
the one-step map plus sigma^2 delta process noise on the driver, and each
observation updates against log(c z) linearised at the predicted incidence.
The incidence coordinate z is reset to zero, with zero variance, after every
update.

"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import linalg

from epidiff.dynamics.kernels import seir_step
from epidiff.utils.configs.constants import FD_REL_STEP
from epidiff.utils.configs.constants import PSD_FLOOR
from epidiff.utils.errors import DomainError
from epidiff.utils.errors import NumericalError

N_STATE = 7
Z, X, V = 4, 5, 6
LOG_2PI = np.log(2 * np.pi)


@dataclass(frozen=True, eq=False)
class GaussianBelief:
    """Filtered Gaussian belief at one observation time."""

    time: float
    mean: np.ndarray
    cov: np.ndarray


def repair_psd(cov, floor=PSD_FLOOR):
    """Symmetrise; floor eigenvalues at ``floor`` times the largest only if some
    fall below ``-floor`` times it."""
    cov = 0.5 * (cov + cov.T)
    eigval, eigvec = np.linalg.eigh(cov)
    top = eigval.max(initial=0.0)
    if eigval.min(initial=0.0) >= -floor * max(top, 1e-300):
        return cov
    if top <= 0:
        raise NumericalError("belief covariance has no positive eigenvalue")
    eigval = np.maximum(eigval, floor * top)
    return (eigvec * eigval) @ eigvec.T


def numerical_jacobian(f, m, rel_step=FD_REL_STEP):
    """Central-difference Jacobian of ``f`` at ``m``."""
    m = np.asarray(m, dtype=np.float64)
    cols = []
    for c in range(m.shape[0]):
        h = rel_step * max(abs(m[c]), 1.0)
        e = np.zeros_like(m)
        e[c] = h
        cols.append((f(m + e) - f(m - e)) / (2 * h))
    return np.column_stack(cols) if cols else np.zeros((0, 0))


def kalman_update(m, P, y, h, H, R):
    """Kalman update in Joseph form.

    Returns:
        tuple: updated mean, covariance and the Gaussian log predictive density of y
    """
    resid = y - h
    S = H @ P @ H.T + R
    S = 0.5 * (S + S.T)
    try:
        factor = linalg.cho_factor(S)
    except linalg.LinAlgError as err:
        raise NumericalError("innovation covariance is not positive definite") from err
    loglik = -0.5 * (resid @ linalg.cho_solve(factor, resid) + 2 * np.log(np.diag(factor[0])).sum() + resid.shape[0] * LOG_2PI)
    gain = linalg.cho_solve(factor, H @ P).T
    m = m + gain @ resid
    A = np.eye(m.shape[0]) - gain @ H
    P = A @ P @ A.T + gain @ R @ gain.T
    return m, repair_psd(P), float(loglik)


def extended_kalman_filter(model):
    """Run the EKF over a model exposing ``initial_belief``, ``predict``,
    ``linearise_observation``, ``reset`` and ``obs_times``.

    Returns:
        tuple[float, list[GaussianBelief]]
    """
    m, P = model.initial_belief()
    loglik = 0.0
    beliefs = []
    for i, t in enumerate(model.obs_times):
        m, P = model.predict(m, P, i)
        P = repair_psd(P)
        y, h, H, R = model.linearise_observation(m, i)
        if y.shape[0]:
            m, P, increment = kalman_update(m, P, y, h, H, R)
            loglik += increment
        m, P = model.reset(m, P)
        beliefs.append(GaussianBelief(time=float(t), mean=m.copy(), cov=P.copy()))
    return loglik, beliefs


@njit(nogil=True, cache=True)
def _mean_map(state, delta, driver, k, gamma, b, ou_rate, ou_mean, population, x_next, force, flows):
    """Noise-free Euler step of the flattened (n_groups * 7) state."""
    n_groups = population.shape[0]
    out = state.copy()
    comp = np.empty((n_groups, 4))
    x = np.empty(n_groups)
    for a in range(n_groups):
        for c in range(4):
            comp[a, c] = state[a * 7 + c]
        x[a] = state[a * 7 + 5]
    seir_step(comp, x, delta, k, gamma, b, population, force, flows)
    for a in range(n_groups):
        base = a * 7
        for c in range(4):
            out[base + c] = comp[a, c]
        out[base + 4] = state[base + 4] + flows[a]
        if driver == 1:
            out[base + 5] = state[base + 5] + delta * state[base + 6]
        elif driver == 2:
            out[base + 5] = state[base + 5] + delta * ou_rate * (ou_mean - state[base + 5])
        elif driver == 3:
            out[base + 5] = x_next[a]
    return out


@njit(nogil=True, cache=True)
def ekf_predict_interval(m, P, deltas, driver, k, gamma, b, sigma, ou_rate, ou_mean, population, x_given, rel_step):
    """Propagate mean and covariance over one observation interval."""
    dim = m.shape[0]
    n_groups = population.shape[0]
    force = np.empty(n_groups)
    flows = np.empty(n_groups)
    jac = np.empty((dim, dim))
    for s in range(deltas.shape[0]):
        delta = deltas[s]
        x_next = x_given[s + 1]
        for c in range(dim):
            h = rel_step * max(abs(m[c]), 1.0)
            up = m.copy()
            down = m.copy()
            up[c] += h
            down[c] -= h
            f_up = _mean_map(up, delta, driver, k, gamma, b, ou_rate, ou_mean, population, x_next, force, flows)
            f_down = _mean_map(down, delta, driver, k, gamma, b, ou_rate, ou_mean, population, x_next, force, flows)
            for r in range(dim):
                jac[r, c] = (f_up[r] - f_down[r]) / (2 * h)
        m = _mean_map(m, delta, driver, k, gamma, b, ou_rate, ou_mean, population, x_next, force, flows)
        P = jac @ P @ jac.T
        for a in range(n_groups):
            if driver == 0 or driver == 2:
                P[a * 7 + 5, a * 7 + 5] += sigma[a] ** 2 * delta
            elif driver == 1:
                P[a * 7 + 6, a * 7 + 6] += sigma[a] ** 2 * delta
    return m, P


class SEIREKFModel:
    """EKF view of the SEIR model.

    Args:
        model (ModelSpec):
            model and driver kind
        params (ParamSet):
            static parameters
        data (ObservationSeries):
            weekly counts
        grid (TimeGrid):
            Euler grid matching the data
    """

    def __init__(self, model, params, data, grid):
        if data.n_obs != grid.n_obs or not np.allclose(data.times, grid.obs_times):
            raise DomainError("grid", "observation times of the grid and the data differ")
        self.model = model
        self.params = params
        self.data = data
        self.grid = grid
        self.obs_times = grid.obs_times
        self.dim = model.n_groups * N_STATE
        if model.driver == "sigmoid":
            self._x_given = np.repeat(model.sigmoid.log_beta(grid.points)[:, None], model.n_groups, axis=1)
        else:
            self._x_given = np.zeros((grid.n_points, model.n_groups))

    def initial_belief(self):
        state = np.zeros((self.model.n_groups, N_STATE))
        state[:, :4] = self.params.initial_compartments()
        state[:, X] = self.params.x0 if self.model.driver != "sigmoid" else self._x_given[0]
        state[:, V] = self.params.slope0
        return state.ravel(), np.zeros((self.dim, self.dim))

    def predict(self, m, P, i):
        p = self.params
        deltas = np.full(self.grid.steps_per_interval, self.grid.interval_deltas[i])
        return ekf_predict_interval(
            m,
            P,
            deltas,
            self.model.driver_code,
            p.k,
            p.gamma,
            p.b,
            np.asarray(p.sigma, dtype=np.float64),
            p.ou_rate,
            p.ou_mean,
            np.asarray(p.population, dtype=np.float64),
            self._x_given[self.grid.interval_slice(i)],
            FD_REL_STEP,
        )

    def linearise_observation(self, m, i):
        observed = [g for g, y in enumerate(self.data.values[i]) if not np.isnan(y)]
        y = np.log(self.data.values[i][observed])
        z = m[[g * N_STATE + Z for g in observed]]
        if np.any(z <= 0):
            raise NumericalError(f"predicted incidence is not positive at observation {i}; cannot linearise log(c z)")
        H = np.zeros((len(observed), self.dim))
        for row, g in enumerate(observed):
            H[row, g * N_STATE + Z] = 1.0 / z[row]
        R = self.params.tau**2 * np.eye(len(observed))
        return y, np.log(self.params.c * z), H, R

    def reset(self, m, P):
        idx = [g * N_STATE + Z for g in range(self.model.n_groups)]
        m = m.copy()
        P = P.copy()
        m[idx] = 0.0
        P[idx, :] = 0.0
        P[:, idx] = 0.0
        return m, P

    def beta_estimates(self, beliefs):
        """Log-normal mean of beta at each observation, (n_obs, n_groups)."""
        out = np.empty((len(beliefs), self.model.n_groups))
        for i, belief in enumerate(beliefs):
            for g in range(self.model.n_groups):
                j = g * N_STATE + X
                out[i, g] = np.exp(belief.mean[j] + 0.5 * belief.cov[j, j])
        return out


def ekf_loglik(model, p, data, grid=None, delta=0.1):
    """EKF approximation of the log likelihood.

    Args:
        model (ModelSpec | object):
            model spec of the SEIR model, or any object with the EKF interface
        p (ParamSet | None):
            static parameters (ignored for ready-made EKF models)
        data (ObservationSeries | None):
            weekly counts
        grid (TimeGrid | None):
            Euler grid, built from ``delta`` when missing
        delta (float):
            Euler step in days

    Returns:
        tuple[float, list[GaussianBelief]]
    """
    if hasattr(model, "initial_belief"):
        return extended_kalman_filter(model)
    if not p.tau > 0:
        raise DomainError("tau", "the EKF needs a positive observation sd")
    grid = grid or data.grid(delta)
    return extended_kalman_filter(SEIREKFModel(model, p, data, grid))
