"""Adaptive random-walk Metropolis core.

Shared by PMMH (noisy particle-filter likelihood), EK-MCMC (EKF likelihood)
and the exact-likelihood checks. The target is only ever evaluated at
proposals; the current state keeps the likelihood value it was accepted with,
which is what makes the pseudo-marginal chain exact.

"""
from __future__ import annotations

from dataclasses import dataclass
from dataclasses import field

import numpy as np
from scipy import stats
from tqdm import tqdm

from epidiff.mcmc.adaptation import RunningMoments
from epidiff.mcmc.adaptation import _cholesky
from epidiff.mcmc.adaptation import adapt_scale
from epidiff.mcmc.adaptation import propose
from epidiff.utils.configs.constants import ALPHA2
from epidiff.utils.configs.constants import COV_ADAPT_FACTOR
from epidiff.utils.configs.constants import COV_JITTER
from epidiff.utils.configs.constants import RW_SCALE
from epidiff.utils.errors import DegenerateInferenceError
from epidiff.utils.logging import get_logger
from epidiff.utils.rng import make_rng

logger = get_logger(__name__)


@dataclass
class Evaluation:
    """Log likelihood of a proposal and whatever should be recorded with it."""

    loglik: float
    extra: object = None


@dataclass
class ChainState:
    """Mutable state of a running chain."""

    v: np.ndarray
    loglik: float
    logprior: float
    extra: object
    constrained: np.ndarray
    eps: float
    moments: object
    i: int = 0
    n_accepted: int = 0

    @property
    def acc_rate(self):
        return self.n_accepted / max(self.i, 1)


@dataclass(frozen=True, eq=False)
class ChainOutput:
    """Recorded chain.

    ``draws`` is on the constrained scale with columns ``names``;
    ``unconstrained`` holds the sampled coordinates. Paths and incidence are
    the smoothing draws kept every ``thin`` iterations, at ``path_iters``.
    """

    names: list
    draws: np.ndarray
    coordinate_names: list
    unconstrained: np.ndarray
    loglik: np.ndarray
    logprior: np.ndarray
    accepted: np.ndarray
    acc_rate: np.ndarray
    eps: np.ndarray
    burn_in: int
    path_iters: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    paths: np.ndarray = field(default_factory=lambda: np.zeros((0, 0, 0)))
    incidence: np.ndarray = field(default_factory=lambda: np.zeros((0, 0, 0)))
    path_times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    obs_times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    meta: dict = field(default_factory=dict)

    @property
    def n_iters(self):
        return self.draws.shape[0]

    def kept(self, values=None):
        """Post burn-in rows of ``values`` (default: constrained draws)."""
        values = self.draws if values is None else values
        return values[self.burn_in :]

    def kept_paths(self):
        keep = self.path_iters >= self.burn_in
        return self.paths[keep], self.incidence[keep]

    def column(self, name):
        return self.draws[:, self.names.index(name)]


def mixture_logpdf(x, theta, eps, sigma0, sigma_i=None, alpha2=ALPHA2):
    """Log density of the proposal at ``x`` given the current ``theta``."""
    d = theta.shape[0]
    scale = eps * RW_SCALE**2 / d
    fixed = stats.multivariate_normal.logpdf(x, theta, scale * sigma0)
    if sigma_i is None:
        return float(fixed)
    adapted = stats.multivariate_normal.logpdf(x, theta, scale * sigma_i)
    return float(np.logaddexp(np.log(alpha2) + fixed, np.log1p(-alpha2) + adapted))


def log_acceptance_ratio(loglik_new, logprior_new, loglik, logprior, log_q_forward=0.0, log_q_backward=0.0):
    """log of [L* pi* q(theta | theta*)] / [L pi q(theta* | theta)]."""
    ratio = (loglik_new + logprior_new + log_q_backward) - (loglik + logprior + log_q_forward)
    return -np.inf if np.isnan(ratio) else ratio


def run_adaptive_metropolis(
    target,
    log_prior_fn,
    v0,
    sigma0,
    config,
    rng_seed=None,
    transform=None,
    names=None,
    coordinate_names=None,
    path_times=None,
    obs_times=None,
    progress=True,
):
    """Adaptive random-walk Metropolis.

    Args:
        target (Callable[[np.ndarray, np.random.Generator], Evaluation]):
            log likelihood (possibly a noisy estimate) at a proposal
        log_prior_fn (Callable[[np.ndarray], float]):
            log prior on the unconstrained scale, Jacobian included
        v0 (np.ndarray):
            starting point
        sigma0 (np.ndarray):
            seed covariance Sigma0
        config (MCMCConfig):
            iterations, burn-in, thinning and adaptation settings
        rng_seed (int | np.random.Generator | None):
            seed or stream
        transform (Callable[[np.ndarray], np.ndarray] | None):
            map to the recorded constrained columns; identity when missing
        names (list[str] | None):
            names of the constrained columns
        coordinate_names (list[str] | None):
            names of the unconstrained coordinates
        path_times, obs_times (np.ndarray | None):
            grid and observation times of recorded paths
        progress (bool):
            show a progress bar

    Returns:
        ChainOutput
    """
    rng = make_rng(rng_seed)
    transform = transform or (lambda v: v)
    v0 = np.asarray(v0, dtype=np.float64)
    d = v0.shape[0]
    sigma0 = np.atleast_2d(np.asarray(sigma0, dtype=np.float64)) if d else np.zeros((0, 0))
    chol0 = _cholesky(sigma0, "Sigma0") if d else None
    cov_start = config.cov_adapt_start if config.cov_adapt_start is not None else COV_ADAPT_FACTOR * d

    logprior = log_prior_fn(v0)
    first = target(v0, rng)
    if not np.isfinite(first.loglik + logprior):
        raise DegenerateInferenceError(
            "log posterior is not finite at the initial parameters; "
            "check the initial values, raise the particle count or reduce the Euler step"
        )
    state = ChainState(
        v=v0.copy(),
        loglik=first.loglik,
        logprior=logprior,
        extra=first.extra,
        constrained=np.asarray(transform(v0), dtype=np.float64),
        eps=float(config.eps0),
        moments=RunningMoments(d),
    )

    n = config.n_iters
    draws = np.empty((n, state.constrained.shape[0]))
    unconstrained = np.empty((n, d))
    logliks = np.empty(n)
    logpriors = np.empty(n)
    accepted = np.zeros(n, dtype=bool)
    acc_rate = np.empty(n)
    eps_trace = np.empty(n)
    path_iters, paths, incidence = [], [], []

    for it in tqdm(range(n), disable=not progress, desc="mcmc", mininterval=5):
        state.i = it + 1
        if d:
            sigma_i = chol_i = None
            if config.adapt == "scale+cov" and state.i > cov_start:
                sigma_i = state.moments.covariance()
                sigma_i = 0.5 * (sigma_i + sigma_i.T) + COV_JITTER * np.eye(d)
                chol_i = _cholesky(sigma_i, "Sigma_i")
            v_new = propose(state.v, state.eps, sigma0, sigma_i, config.alpha2, rng, chol0, chol_i)
            logprior_new = log_prior_fn(v_new)
            proposal = target(v_new, rng) if np.isfinite(logprior_new) else Evaluation(-np.inf)
            log_ratio = log_acceptance_ratio(proposal.loglik, logprior_new, state.loglik, state.logprior)
            if np.log(rng.uniform()) < log_ratio:
                state.v = v_new
                state.loglik = proposal.loglik
                state.logprior = logprior_new
                state.extra = proposal.extra
                state.constrained = np.asarray(transform(v_new), dtype=np.float64)
                state.n_accepted += 1
                accepted[it] = True
            if config.adapt != "none":
                state.eps = adapt_scale(state.eps, state.acc_rate, state.i, config.alpha1)
            if config.adapt == "scale+cov":
                state.moments.update(state.v)
        draws[it] = state.constrained
        unconstrained[it] = state.v
        logliks[it] = state.loglik
        logpriors[it] = state.logprior
        acc_rate[it] = state.acc_rate
        eps_trace[it] = state.eps
        if state.extra is not None and state.i % config.thin == 0:
            path_iters.append(it)
            paths.append(state.extra[0])
            incidence.append(state.extra[1])
        if state.i % max(n // 10, 1) == 0:
            logger.debug(f"iteration {state.i}: acceptance {state.acc_rate:.3f}, eps {state.eps:.4g}")

    logger.info(f"chain finished: {n} iterations, acceptance rate {state.acc_rate:.3f}")
    return ChainOutput(
        names=list(names) if names is not None else [f"theta{j}" for j in range(draws.shape[1])],
        draws=draws,
        coordinate_names=list(coordinate_names) if coordinate_names is not None else [f"v{j}" for j in range(d)],
        unconstrained=unconstrained,
        loglik=logliks,
        logprior=logpriors,
        accepted=accepted,
        acc_rate=acc_rate,
        eps=eps_trace,
        burn_in=min(config.burn_in, n),
        path_iters=np.asarray(path_iters, dtype=np.int64),
        paths=np.asarray(paths) if paths else np.zeros((0, 0, 0)),
        incidence=np.asarray(incidence) if incidence else np.zeros((0, 0, 0)),
        path_times=np.zeros(0) if path_times is None else np.asarray(path_times),
        obs_times=np.zeros(0) if obs_times is None else np.asarray(obs_times),
    )
