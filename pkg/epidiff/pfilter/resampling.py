"""Resampling."""
from __future__ import annotations

import numpy as np

from epidiff.utils.errors import DomainError
from epidiff.utils.rng import make_rng

SCHEMES = ("systematic", "multinomial")


def resample(weights, n, scheme="systematic", rng_seed=None):
    """Ancestor indices drawn according to ``weights``.

    Args:
        weights (np.ndarray):
            non-negative weights, need not be normalised
        n (int):
            number of indices to draw
        scheme (str):
            ``systematic`` (one uniform shared by n strata) or ``multinomial``
        rng_seed (int | np.random.Generator | None):
            seed or stream

    Returns:
        np.ndarray: n indices into ``weights``
    """
    weights = np.asarray(weights, dtype=np.float64)
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise DomainError("weights", "must be finite and non-negative")
    total = weights.sum()
    if not total > 0:
        raise DomainError("weights", "all weights are zero")
    rng = make_rng(rng_seed)
    cdf = np.cumsum(weights / total)
    # rounding can leave cdf below 1 or push u to 1; trailing zero weights stay unreachable
    last = np.flatnonzero(weights)[-1]
    cdf[last:] = 1.0
    if scheme == "systematic":
        u = (rng.uniform() + np.arange(n)) / n
    elif scheme == "multinomial":
        u = rng.uniform(size=n)
    else:
        raise DomainError("scheme", f"unknown resampling scheme {scheme}, expected one of {SCHEMES}")
    return np.minimum(np.searchsorted(cdf, u, side="right"), last)


def effective_sample_size(log_w):
    """1 / sum(W^2) of normalised log weights."""
    w = np.exp(log_w - log_w.max())
    w /= w.sum()
    return 1.0 / np.sum(w**2)
