"""Effective reproduction number."""
from __future__ import annotations

import numpy as np

from epidiff.utils.errors import DomainError


def effective_reproduction(beta, S, gamma, N):
    """R_t = beta * S / (N * gamma), the standard SEIR expression.

    Args:
        beta (float | np.ndarray):
            contact rate per day
        S (float | np.ndarray):
            susceptibles in persons
        gamma (float):
            removal rate per day
        N (float):
            population in persons

    Returns:
        float | np.ndarray
    """
    if np.any(np.asarray(gamma) <= 0):
        raise DomainError("gamma", f"must be strictly positive, got {gamma}")
    if np.any(np.asarray(N) <= 0):
        raise DomainError("N", f"must be strictly positive, got {N}")
    r_t = np.asarray(beta) * np.asarray(S) / (np.asarray(N) * np.asarray(gamma))
    return float(r_t) if r_t.ndim == 0 else r_t
