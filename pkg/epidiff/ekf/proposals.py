"""Proposal covariances.

Seeds for the PMMH proposal: the inverse observed information at the mode of
the EKF posterior (EK-Mode), and the sample covariance of a chain run on the
EKF likelihood (EK-MCMC).

"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from epidiff.ekf.ekf import ekf_loglik
from epidiff.mcmc.adaptation import _cholesky
from epidiff.mcmc.sampler import Evaluation
from epidiff.mcmc.sampler import run_adaptive_metropolis
from epidiff.model.priors import log_prior
from epidiff.model.transforms import from_unconstrained
from epidiff.model.transforms import to_unconstrained
from epidiff.utils.configs.constants import EK_MCMC_MIN_ACCEPT
from epidiff.utils.configs.constants import HESSIAN_REL_STEP
from epidiff.utils.configs.constants import PSD_FLOOR
from epidiff.utils.configs.data_models import MCMCConfig
from epidiff.utils.errors import ConvergenceError
from epidiff.utils.errors import DomainError
from epidiff.utils.errors import NumericalError
from epidiff.utils.logging import get_logger

logger = get_logger(__name__)

TAGS = ("identity", "ek-mode", "ek-mcmc", "running-estimate")


@dataclass(frozen=True, eq=False)
class ProposalCovariance:
    """SPD covariance on the unconstrained scale and where it came from.

    ``warning`` is set when the construction fell back or looked unreliable;
    ``theta`` holds the mode (EK-Mode) or the chain mean (EK-MCMC).
    """

    matrix: np.ndarray
    tag: str
    warning: str | None = None
    theta: np.ndarray | None = None

    def __post_init__(self):
        if self.tag not in TAGS:
            raise DomainError("tag", f"unknown provenance {self.tag!r}")
        if self.matrix.shape[0]:
            _cholesky(self.matrix, self.tag)

    @classmethod
    def identity(cls, d, warning=None, theta=None):
        return cls(matrix=np.eye(d), tag="identity", warning=warning, theta=theta)


def make_spd(cov, floor=PSD_FLOOR):
    """Symmetrise and floor eigenvalues at ``floor`` times the largest.

    Returns:
        np.ndarray | None: repaired matrix, or None when no eigenvalue is positive
    """
    cov = np.atleast_2d(0.5 * (cov + cov.T))
    eigval, eigvec = np.linalg.eigh(cov)
    top = eigval.max(initial=0.0)
    if not top > 0:
        return None
    if eigval.min() > floor * top:
        return cov
    eigval = np.maximum(eigval, floor * top)
    return (eigvec * eigval) @ eigvec.T


def numerical_hessian(f, x, rel_step=HESSIAN_REL_STEP):
    """Central finite-difference Hessian of ``f`` at ``x``."""
    x = np.asarray(x, dtype=np.float64)
    d = x.shape[0]
    h = rel_step * np.maximum(np.abs(x), 1.0)
    f0 = f(x)
    hess = np.empty((d, d))
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h[i]
        hess[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(d)
            ej[j] = h[j]
            value = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4 * h[i] * h[j])
            hess[i, j] = hess[j, i] = value
    return hess


def mode_and_curvature(objective, v0, max_iter=5_000, xatol=1e-10, fatol=1e-12):
    """Maximise ``objective`` by Nelder-Mead and invert its negative Hessian there.

    Args:
        objective (Callable[[np.ndarray], float]):
            log posterior on the unconstrained scale
        v0 (np.ndarray):
            starting point
        max_iter (int):
            optimiser iteration budget
        xatol, fatol (float):
            simplex tolerances

    Returns:
        ProposalCovariance: tagged ``ek-mode``, or ``identity`` with a warning when
        the curvature has no positive direction
    """
    v0 = np.asarray(v0, dtype=np.float64)
    d = v0.shape[0]
    if d == 0:
        return ProposalCovariance(matrix=np.zeros((0, 0)), tag="ek-mode", theta=v0)

    def negative(v):
        value = objective(v)
        return -value if np.isfinite(value) else np.inf

    res = optimize.minimize(
        negative,
        v0,
        method="Nelder-Mead",
        options={"maxiter": max_iter, "maxfev": 2 * max_iter, "xatol": xatol, "fatol": fatol, "adaptive": d > 2},
    )
    if not res.success:
        raise ConvergenceError(f"mode search stopped after {res.nit} iterations: {res.message}")
    mode = res.x
    curvature = -numerical_hessian(objective, mode)
    if not np.all(np.isfinite(curvature)):
        raise NumericalError("log posterior is not finite around the mode")
    matrix = make_spd(curvature)
    if matrix is None:
        logger.warning("curvature at the mode has no positive direction; falling back to the identity")
        return ProposalCovariance.identity(d, warning="indefinite Hessian", theta=mode)
    cov = make_spd(np.linalg.inv(matrix))
    repaired = not np.allclose(matrix, 0.5 * (curvature + curvature.T))
    warning = "Hessian repaired by eigenvalue flooring" if repaired else None
    if repaired:
        logger.warning(warning)
    logger.info(f"mode found after {res.nit} iterations, log posterior {-res.fun:.3f}")
    return ProposalCovariance(matrix=cov, tag="ek-mode", warning=warning, theta=mode)


def ekf_log_posterior(model, data, spec, grid=None, delta=0.1):
    """v -> EKF log likelihood + log prior, -inf where either is undefined."""
    grid = grid or data.grid(delta)

    def objective(v):
        try:
            lp = log_prior(v, spec)
            if not np.isfinite(lp):
                return -np.inf
            return ekf_loglik(model, from_unconstrained(v, spec), data, grid, delta)[0] + lp
        except (DomainError, NumericalError):
            return -np.inf

    return objective


def ek_mode(model, data, p_init, spec, grid=None, delta=0.1, max_iter=5_000):
    """EK-Mode seed: mode of the EKF posterior and its inverse observed information.

    Args:
        model (ModelSpec):
            model and driver kind
        data (ObservationSeries):
            weekly counts
        p_init (ParamSet):
            starting parameters; also supplies the fixed slots
        spec (PriorSpec):
            priors, decides the sampled coordinates
        grid (TimeGrid | None):
            Euler grid
        delta (float):
            Euler step when ``grid`` is missing
        max_iter (int):
            optimiser budget

    Returns:
        tuple[np.ndarray, ProposalCovariance]
    """
    objective = ekf_log_posterior(model, data, spec, grid, delta)
    v0 = to_unconstrained(p_init, spec)
    if not np.isfinite(objective(v0)):
        raise NumericalError("EKF log posterior is not finite at the initial parameters")
    proposal = mode_and_curvature(objective, v0, max_iter=max_iter)
    return proposal.theta, proposal


def chain_covariance(target, log_prior_fn, v0, n_iters, rng_seed=None, burn_in=None, progress=False):
    """Sample covariance of an adaptive Metropolis chain after burn-in.

    Args:
        target (Callable[[np.ndarray, np.random.Generator], Evaluation]):
            log likelihood
        log_prior_fn (Callable[[np.ndarray], float]):
            log prior
        v0 (np.ndarray):
            starting point
        n_iters (int):
            chain length
        rng_seed (int | np.random.Generator | None):
            seed or stream
        burn_in (int | None):
            discarded iterations, half the chain by default
        progress (bool):
            show a progress bar

    Returns:
        ProposalCovariance
    """
    v0 = np.asarray(v0, dtype=np.float64)
    d = v0.shape[0]
    burn_in = n_iters // 2 if burn_in is None else burn_in
    config = MCMCConfig(n_iters=n_iters, burn_in=burn_in, thin=n_iters + 1, adapt="scale+cov")
    chain = run_adaptive_metropolis(target, log_prior_fn, v0, np.eye(d), config, rng_seed, progress=progress)
    if d == 0:
        return ProposalCovariance(matrix=np.zeros((0, 0)), tag="ek-mcmc", theta=v0)
    draws = chain.kept(chain.unconstrained)
    cov = np.atleast_2d(np.cov(draws, rowvar=False))
    if draws.shape[0] < 2 or np.any(np.diag(cov) <= 0):
        raise NumericalError("EK-MCMC chain has zero variance in some coordinate; no proposal covariance")
    warning = None
    acc_rate = float(chain.acc_rate[-1])
    if acc_rate < EK_MCMC_MIN_ACCEPT:
        warning = f"low acceptance rate {acc_rate:.4f}"
        logger.warning(f"EK-MCMC: {warning}")
    matrix = make_spd(cov)
    return ProposalCovariance(matrix=matrix, tag="ek-mcmc", warning=warning, theta=draws.mean(axis=0))


def ek_mcmc(model, data, spec, n_iters, rng_seed=None, p_init=None, grid=None, delta=0.1, burn_in=None):
    """EK-MCMC seed: posterior covariance of a chain on the EKF likelihood.

    Args:
        model (ModelSpec):
            model and driver kind
        data (ObservationSeries):
            weekly counts
        spec (PriorSpec):
            priors
        n_iters (int):
            chain length
        rng_seed (int | np.random.Generator | None):
            seed or stream
        p_init (ParamSet | None):
            starting parameters; prior point masses give the fixed slots
        grid (TimeGrid | None):
            Euler grid
        delta (float):
            Euler step when ``grid`` is missing
        burn_in (int | None):
            discarded iterations

    Returns:
        ProposalCovariance
    """
    grid = grid or data.grid(delta)
    objective = ekf_log_posterior(model, data, spec, grid, delta)
    v0 = to_unconstrained(p_init, spec) if p_init is not None else np.zeros(spec.dim)
    if not np.isfinite(objective(v0)):
        raise NumericalError("EKF log posterior is not finite at the initial parameters")

    def target(v, rng):
        try:
            return Evaluation(ekf_loglik(model, from_unconstrained(v, spec), data, grid, delta)[0])
        except (DomainError, NumericalError):
            return Evaluation(-np.inf)

    logger.info(f"EK-MCMC: {n_iters} iterations on the EKF likelihood")
    return chain_covariance(target, lambda v: log_prior(v, spec), v0, n_iters, rng_seed, burn_in)
