"""Parameter transforms.

Positive slots map by log, real slots unchanged, and each (E0, I0, R0) triple
by the additive log-ratio against S0. Point-mass slots are left out of the
unconstrained vector and restored from their descriptor.

"""
from __future__ import annotations

import numpy as np

from epidiff.model.params import FRACTIONS
from epidiff.model.params import POSITIVE
from epidiff.model.params import ParamBatch
from epidiff.model.params import check_params
from epidiff.model.params import slot_value
from epidiff.utils.configs.constants import ALR_CLIP
from epidiff.utils.configs.constants import LOG_CLIP
from epidiff.utils.errors import DomainError


def to_unconstrained(p, spec):
    """Unconstrained vector of the sampled slots of ``p``.

    Args:
        p (ParamSet):
            parameter set, must match ``spec``'s number of groups
        spec (PriorSpec):
            decides which slots are sampled

    Returns:
        np.ndarray: length ``spec.dim``
    """
    check_params(p)
    if p.n_groups != spec.n_groups:
        raise DomainError("population", f"parameter set has {p.n_groups} groups, prior spec {spec.n_groups}")
    v = []
    for slot in spec.sampled_slots():
        value = slot_value(p, slot)
        if slot.kind == FRACTIONS:
            fractions = np.asarray(value, dtype=np.float64)
            if fractions.min() <= 0:
                raise DomainError(slot.name, f"sampled initial fractions must be strictly positive, got {value}")
            v += list(np.log(fractions / (1.0 - fractions.sum())))
        elif slot.kind == POSITIVE:
            if not value > 0:
                raise DomainError(slot.name, f"sampled positive parameter must be strictly positive, got {value}")
            v.append(np.log(value))
        else:
            v.append(value)
    return np.asarray(v, dtype=np.float64)


def inverse_alr(u):
    """(..., 3) log-ratios to (..., 3) fractions (E0, I0, R0).

    Log-ratios are clipped to +-ALR_CLIP so S0 stays positive in floating point.
    """
    u = np.clip(np.asarray(u, dtype=np.float64), -ALR_CLIP, ALR_CLIP)
    log_s0 = -np.logaddexp(0.0, np.logaddexp.reduce(u, axis=-1))
    return np.exp(u + log_s0[..., None])


def decode_batch(v, spec):
    """Batch of parameter sets from an (n, d) matrix of unconstrained vectors."""
    v = np.atleast_2d(np.asarray(v, dtype=np.float64))
    if v.shape[1] != spec.dim:
        raise DomainError("v", f"expected dimension {spec.dim}, got {v.shape[1]}")
    n = v.shape[0]
    n_groups = spec.n_groups
    fields = {
        "b": np.zeros(n),
        "ou_rate": np.zeros(n),
        "ou_mean": np.zeros(n),
        "slope0": np.zeros(n),
        "sigma": np.zeros((n, n_groups)),
        "beta0": np.zeros((n, n_groups)),
        "init_fractions": np.zeros((n, n_groups, 3)),
        "population": np.zeros((n, n_groups)),
    }
    i = 0
    for slot in spec.slots():
        desc = spec.descriptors[slot.name]
        if desc.kind == "point_mass":
            value = np.asarray(desc.value, dtype=np.float64)
        else:
            u = v[:, i : i + slot.size]
            i += slot.size
            if slot.kind == FRACTIONS:
                value = inverse_alr(u)
            elif slot.kind == POSITIVE:
                value = np.exp(np.clip(u[:, 0], -LOG_CLIP, LOG_CLIP))
            else:
                value = u[:, 0]
        if slot.group is None:
            fields[slot.field] = np.broadcast_to(value, (n,)).copy()
        else:
            fields[slot.field][:, slot.group] = value
    return ParamBatch(**fields)


def from_unconstrained(v, spec):
    """Inverse of ``to_unconstrained``; always a valid ParamSet."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != spec.dim:
        raise DomainError("v", f"expected a vector of dimension {spec.dim}, got shape {v.shape}")
    return decode_batch(v[None, :], spec).row(0)
