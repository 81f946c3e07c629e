"""Path reparametrisations.

Transforms that decouple a driver path from its volatility:

  - Lamperti: u_t = (x_t - x_0) / sigma, a unit-volatility path starting at 0.
  - driving noise: w_j = (x_j - x_{j-1} - delta_j mu(x_{j-1})) / sigma, the
    Euler increments of the Brownian motion driving x. They have variance
    delta_j, and for the Brownian driver their running sum is u.

The Girsanov term gives the density of u against a standard Brownian motion.

"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from epidiff.dynamics.drivers import LatentPath
from epidiff.utils.errors import DomainError

KINDS = ("lamperti", "chib")


@dataclass(frozen=True, eq=False)
class ReparamPath:
    """Reparametrised path, (n_points, n_groups).

    For ``lamperti`` the values are u with u[0] = 0; for ``chib`` row j >= 1
    holds the increment w_j of step j and row 0 is 0.
    """

    grid: object
    values: np.ndarray
    kind: str
    x0: np.ndarray

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError("kind", f"unknown reparametrisation {self.kind}")


def _sigma(p):
    sigma = np.asarray(p.sigma, dtype=np.float64)
    if np.any(sigma <= 0):
        raise DomainError("sigma", "reparametrisation needs a strictly positive volatility")
    return sigma


def _drift(x, p, driver):
    """Drift of x under the driver; zero for Brownian motion."""
    if driver == "bm":
        return np.zeros_like(x)
    if driver == "ou":
        return p.ou_rate * (p.ou_mean - x)
    raise DomainError("driver", f"{driver} paths cannot be reparametrised to unit volatility")


def lamperti_transform(path, p):
    """u_t = (x_t - x_0) / sigma."""
    x0 = path.x[0].copy()
    return ReparamPath(grid=path.grid, values=(path.x - x0) / _sigma(p), kind="lamperti", x0=x0)


def lamperti_inverse(u, p, kind="bm"):
    """x_t = x_0 + sigma u_t."""
    return LatentPath(grid=u.grid, x=u.x0 + _sigma(p) * u.values, kind=kind)


def chib_reparam(path, p, driver="bm"):
    """Driving-noise increments with the drift at the left end of each step."""
    sigma = _sigma(p)
    deltas = path.grid.deltas[:, None]
    x = path.x
    w = np.zeros_like(x)
    w[1:] = (x[1:] - x[:-1] - deltas * _drift(x[:-1], p, driver)) / sigma
    return ReparamPath(grid=path.grid, values=w, kind="chib", x0=x[0].copy())


def chib_inverse(w, p, driver="bm"):
    """Rebuild x from its driving-noise increments by the Euler recursion."""
    sigma = _sigma(p)
    deltas = w.grid.deltas
    x = np.empty_like(w.values)
    x[0] = w.x0
    for j in range(1, x.shape[0]):
        x[j] = x[j - 1] + deltas[j - 1] * _drift(x[j - 1], p, driver) + sigma * w.values[j]
    return LatentPath(grid=w.grid, x=x, kind=driver)


def girsanov_logdensity(u, p, driver="bm", nu=None):
    """Log density of a unit-volatility path against a standard Brownian motion.

    sum_j nu(u_{j-1}) (u_j - u_{j-1}) - 1/2 sum_j nu(u_{j-1})^2 delta_j, summed
    over groups.

    Args:
        u (ReparamPath):
            Lamperti path
        p (ParamSet):
            parameters of the driver
        driver (str):
            driver kind; ``bm`` has no drift and gives exactly 0
        nu (Callable[[np.ndarray], np.ndarray] | None):
            drift of u as a function of u; derived from the driver when missing

    Returns:
        float
    """
    if u.kind != "lamperti":
        raise DomainError("u", "the Girsanov term is defined for Lamperti paths")
    if nu is None:
        if driver == "bm":
            return 0.0
        sigma = _sigma(p)

        def nu(values):
            return _drift(u.x0 + sigma * values, p, driver) / sigma

    values = u.values
    drift = np.asarray(nu(values[:-1]), dtype=np.float64)
    deltas = u.grid.deltas[:, None]
    return float(np.sum(drift * np.diff(values, axis=0)) - 0.5 * np.sum(drift**2 * deltas))
