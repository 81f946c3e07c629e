"""Euler–Maruyama kernels.

Compiled loops shared by simulation, the particle filters and the EKF. The
SEIR compartments use forward Euler with the contact rate held at its left
endpoint value over each step; the driver x = log(beta) is advanced from the
same left endpoint.

Driver codes: 0 BM, 1 integrated BM, 2 OU, 3 given path (sigmoid truth or a
stored latent path).

"""
from __future__ import annotations

import numpy as np
from numba import njit

from epidiff.utils.configs.constants import CLAMP_TOL


@njit(nogil=True, cache=True)
def seir_step(comp, x, delta, k, gamma, b, population, force, flows):
    """Advance one particle's (n_groups, 4) compartments by one Euler step.

    ``force`` and ``flows`` are scratch arrays of length n_groups. Returns the
    incidence k * E * delta per group in ``flows`` and whether any compartment
    fell below the clamp tolerance.
    """
    n_groups = comp.shape[0]
    for a in range(n_groups):
        force[a] = np.exp(x[a]) * comp[a, 2] / population[a]
        for h in range(n_groups):
            if h != a:
                force[a] += b * comp[h, 2] / population[h]
    unstable = False
    for a in range(n_groups):
        s = comp[a, 0]
        e = comp[a, 1]
        i = comp[a, 2]
        infected = delta * force[a] * s
        latent_out = delta * k * e
        removed = delta * gamma * i
        comp[a, 0] = s - infected
        comp[a, 1] = e + infected - latent_out
        comp[a, 2] = i + latent_out - removed
        comp[a, 3] += removed
        flows[a] = latent_out
        for c in range(4):
            if comp[a, c] < 0.0:
                if comp[a, c] < -CLAMP_TOL * population[a]:
                    unstable = True
                comp[a, c] = 0.0
    return unstable


@njit(nogil=True, cache=True)
def driver_step(x, v, noise, delta, driver, sigma, ou_rate, ou_mean, x_next):
    """Advance the drivers of one particle; ``x`` and ``v`` updated in place."""
    n_groups = x.shape[0]
    root = np.sqrt(delta)
    for a in range(n_groups):
        if driver == 0:
            x[a] += sigma[a] * root * noise[a]
        elif driver == 1:
            x[a] += delta * v[a]
            v[a] += sigma[a] * root * noise[a]
        elif driver == 2:
            x[a] += delta * ou_rate * (ou_mean - x[a]) + sigma[a] * root * noise[a]
        else:
            x[a] = x_next[a]


@njit(nogil=True, cache=True)
def propagate_interval(comp, x, v, noise, deltas, driver, k, gamma, b, sigma, ou_rate, ou_mean, population, x_given, record):
    """Propagate a particle ensemble across one observation interval.

    Args:
        comp (np.ndarray): (n, g, 4) compartments at the interval start
        x (np.ndarray): (n, g) log contact rates at the interval start
        v (np.ndarray): (n, g) slopes (integrated BM only)
        noise (np.ndarray): (n, steps, g) standard normal draws
        deltas (np.ndarray): (steps,) step lengths
        driver (int): driver code
        k, gamma, b, ou_rate, ou_mean (np.ndarray): (n,) per-particle scalars
        sigma, population (np.ndarray): (n, g) per-particle group values
        x_given (np.ndarray): (steps + 1, g) driver values for code 3
        record (bool): keep compartments at every grid point

    Returns:
        tuple: compartments, x, v at the interval end, incidence (n, g),
        x at every step end (n, steps, g), compartments at every step end
        (n, steps, g, 4) or empty, unstable flags (n,)
    """
    n = comp.shape[0]
    n_groups = comp.shape[1]
    steps = deltas.shape[0]
    comp = comp.copy()
    x = x.copy()
    v = v.copy()
    incidence = np.zeros((n, n_groups))
    x_path = np.empty((n, steps, n_groups))
    comp_path = np.empty((n, steps if record else 0, n_groups, 4))
    unstable = np.zeros(n, dtype=np.bool_)
    force = np.empty(n_groups)
    flows = np.empty(n_groups)
    for j in range(n):
        for s in range(steps):
            if seir_step(comp[j], x[j], deltas[s], k[j], gamma[j], b[j], population[j], force, flows):
                unstable[j] = True
            for a in range(n_groups):
                incidence[j, a] += flows[a]
            driver_step(x[j], v[j], noise[j, s], deltas[s], driver, sigma[j], ou_rate[j], ou_mean[j], x_given[s + 1])
            x_path[j, s] = x[j]
            if record:
                comp_path[j, s] = comp[j]
    return comp, x, v, incidence, x_path, comp_path, unstable


@njit(nogil=True, cache=True)
def driver_path(x0, v0, noise, deltas, driver, sigma, ou_rate, ou_mean):
    """One driver path over a whole grid, (n_points, g)."""
    steps = deltas.shape[0]
    n_groups = x0.shape[0]
    out = np.empty((steps + 1, n_groups))
    x = x0.copy()
    v = v0.copy()
    out[0] = x
    empty = np.zeros(n_groups)
    for s in range(steps):
        driver_step(x, v, noise[s], deltas[s], driver, sigma, ou_rate, ou_mean, empty)
        out[s + 1] = x
    return out
