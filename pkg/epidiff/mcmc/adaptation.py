"""Proposal adaptation.

Diminishing scale adaptation towards a 0.234 acceptance rate, the two-part
Gaussian mixture proposal, and a streaming mean/covariance of the chain.

"""
from __future__ import annotations

import numpy as np
from numba import float64
from numba import int64
from numba.experimental import jitclass
from scipy import linalg

from epidiff.utils.configs.constants import ALPHA1
from epidiff.utils.configs.constants import ALPHA2
from epidiff.utils.configs.constants import RW_SCALE
from epidiff.utils.configs.constants import TARGET_ACCEPT
from epidiff.utils.errors import NumericalError
from epidiff.utils.rng import make_rng


def adapt_scale(eps, acc_rate, i, alpha1=ALPHA1, target=TARGET_ACCEPT):
    """eps_{i+1} = exp(log eps_i + alpha1^i (acc_rate - target))."""
    return float(np.exp(np.log(eps) + alpha1**i * (acc_rate - target)))


def _cholesky(cov, name):
    try:
        return linalg.cholesky(np.atleast_2d(cov), lower=True)
    except linalg.LinAlgError as err:
        raise NumericalError(f"{name} is not positive definite") from err


def propose(theta, eps, sigma0, sigma_i=None, alpha2=ALPHA2, rng_seed=None, chol0=None, chol_i=None):
    """Random-walk proposal around ``theta``.

    With ``sigma_i`` the proposal is the mixture
    alpha2 N(theta, eps 2.38^2/d sigma0) + (1 - alpha2) N(theta, eps 2.38^2/d sigma_i),
    otherwise the single component with ``sigma0``.

    Args:
        theta (np.ndarray):
            current unconstrained vector
        eps (float):
            scale
        sigma0 (np.ndarray):
            fixed covariance
        sigma_i (np.ndarray | None):
            adapted covariance
        alpha2 (float):
            weight of the fixed component
        rng_seed (int | np.random.Generator | None):
            seed or stream
        chol0, chol_i (np.ndarray | None):
            precomputed lower Cholesky factors

    Returns:
        np.ndarray
    """
    theta = np.asarray(theta, dtype=np.float64)
    d = theta.shape[0]
    if d == 0:
        return theta.copy()
    rng = make_rng(rng_seed)
    use_fixed = sigma_i is None or rng.uniform() < alpha2
    if use_fixed:
        chol = chol0 if chol0 is not None else _cholesky(sigma0, "Sigma0")
    else:
        chol = chol_i if chol_i is not None else _cholesky(sigma_i, "Sigma_i")
    return theta + np.sqrt(eps * RW_SCALE**2 / d) * (chol @ rng.standard_normal(d))


spec = [
    ("n", int64),
    ("mean", float64[:]),
    ("m2", float64[:, :]),
]


@jitclass(spec)
class RunningMoments:
    """Streaming mean and covariance (Welford)."""

    def __init__(self, dim):
        """Init."""
        self.n = 0
        self.mean = np.zeros(dim)
        self.m2 = np.zeros((dim, dim))

    def update(self, x):
        """Add one draw."""
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self.m2 += np.outer(delta, x - self.mean)

    def covariance(self):
        """Sample covariance of the draws so far."""
        if self.n < 2:
            return np.zeros_like(self.m2)
        return self.m2 / (self.n - 1)
