"""Parameters.

Static parameter set of the SEIR models, its named slots, and a batched form
holding one parameter set per particle.

Slots are the unit the priors and transforms work on: every scalar field is one
slot, per-group fields get one slot per group (``sigma_c``, ``sigma_a``) and the
initial fractions (E0, I0, R0) of a group form a single three-valued slot.

"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel

from epidiff.model.structure import group_labels
from epidiff.utils.errors import DomainError

POSITIVE = "positive"
REAL = "real"
FRACTIONS = "fractions"

FRACTION_NAMES = ("E0", "I0", "R0")


class Slot(NamedTuple):
    """One prior/transform unit of the parameter set."""

    name: str
    field: str
    group: int | None
    kind: str

    @property
    def size(self):
        return 3 if self.kind == FRACTIONS else 1


class ParamSet(BaseModel):
    """Static parameters.

    Rates are per day, ``sigma`` per square-root day, populations in persons.
    Per-group fields hold one entry per group (one for the single-group model).
    """

    # 1 / mean latent period
    k: float
    # 1 / mean infectious period
    gamma: float
    # sd of the log observations
    tau: float
    # volatility of each driver; zero gives a deterministic driver
    sigma: tuple[float, ...]
    # initial contact rate of each driver, x0 = log(beta0)
    beta0: tuple[float, ...]
    # (E0, I0, R0) proportions of each group, S0 is the remainder
    init_fractions: tuple[tuple[float, float, float], ...]
    population: tuple[float, ...]
    # reported cases = c * model incidence
    c: float = 1.0
    # cross-group contact rate, two-group model only
    b: float = 0.0
    # OU mean reversion rate and long-run level of x
    ou_rate: float = 0.0
    ou_mean: float = 0.0
    # initial slope of x for the integrated Brownian driver
    slope0: float = 0.0

    class Config:
        frozen = True

    def __init__(self, **data):
        super().__init__(**data)
        check_params(self)

    @property
    def n_groups(self):
        return len(self.population)

    @property
    def x0(self):
        return np.log(np.asarray(self.beta0, dtype=np.float64))

    def initial_compartments(self):
        """(n_groups, 4) array of S, E, I, R in persons."""
        fractions = np.asarray(self.init_fractions, dtype=np.float64)
        population = np.asarray(self.population, dtype=np.float64)
        s0 = 1.0 - fractions.sum(axis=1)
        return np.column_stack([s0, fractions]) * population[:, None]

    def replace(self, **changes):
        """Copy with some fields changed, re-validated."""
        return ParamSet(**{**self.dict(), **changes})


def check_params(p):
    """Raise DomainError naming the first invalid field of ``p``."""
    n_groups = len(p.population)
    if n_groups not in (1, 2):
        raise DomainError("population", f"expected 1 or 2 groups, got {n_groups}")
    for field in ("sigma", "beta0", "init_fractions"):
        if len(getattr(p, field)) != n_groups:
            raise DomainError(field, f"expected {n_groups} entries, got {len(getattr(p, field))}")
    for field in ("k", "gamma", "tau", "c"):
        value = getattr(p, field)
        if not (value > 0 and np.isfinite(value)):
            raise DomainError(field, f"must be strictly positive, got {value}")
    for field in ("beta0", "population"):
        for value in getattr(p, field):
            if not (value > 0 and np.isfinite(value)):
                raise DomainError(field, f"must be strictly positive, got {value}")
    for value in p.sigma:
        if not (value >= 0 and np.isfinite(value)):
            raise DomainError("sigma", f"must be non-negative, got {value}")
    if n_groups == 2 and not p.b > 0:
        raise DomainError("b", f"cross rate must be strictly positive, got {p.b}")
    if p.ou_rate < 0:
        raise DomainError("ou_rate", f"must be non-negative, got {p.ou_rate}")
    for fractions in p.init_fractions:
        if min(fractions) < 0 or sum(fractions) >= 1:
            raise DomainError("init_fractions", f"need E0, I0, R0 >= 0 and E0 + I0 + R0 < 1, got {fractions}")


def slot_name(field, label):
    return f"{field}_{label}" if label else field


def param_slots(n_groups=1, driver="bm"):
    """Ordered slots of a model structure.

    Args:
        n_groups (int):
            1 for SEIR, 2 for the two-age-group model
        driver (str):
            driver kind; OU adds ``ou_rate`` and ``ou_mean``, iBM adds ``slope0``

    Returns:
        list[Slot]
    """
    slots = [
        Slot("k", "k", None, POSITIVE),
        Slot("gamma", "gamma", None, POSITIVE),
        Slot("tau", "tau", None, POSITIVE),
        Slot("c", "c", None, POSITIVE),
    ]
    if n_groups == 2:
        slots.append(Slot("b", "b", None, POSITIVE))
    for g, label in enumerate(group_labels(n_groups)):
        slots += [
            Slot(slot_name("sigma", label), "sigma", g, POSITIVE),
            Slot(slot_name("beta0", label), "beta0", g, POSITIVE),
            Slot(slot_name("init_fractions", label), "init_fractions", g, FRACTIONS),
            Slot(slot_name("population", label), "population", g, POSITIVE),
        ]
    if driver == "ou":
        slots += [Slot("ou_rate", "ou_rate", None, POSITIVE), Slot("ou_mean", "ou_mean", None, REAL)]
    elif driver == "ibm":
        slots.append(Slot("slope0", "slope0", None, REAL))
    return slots


def slot_value(p, slot):
    """Value held by ``p`` in ``slot``: a float, or a 3-tuple for fractions."""
    value = getattr(p, slot.field)
    return value if slot.group is None else value[slot.group]


def slot_columns(slot, n_groups=1):
    """Constrained column names of one slot."""
    if slot.kind == FRACTIONS:
        label = group_labels(n_groups)[slot.group]
        return [slot_name(f, label) for f in FRACTION_NAMES]
    return [slot.name]


def flat_names(n_groups=1, driver="bm"):
    """Column names of the constrained scale, fractions expanded to E0/I0/R0."""
    return [name for slot in param_slots(n_groups, driver) for name in slot_columns(slot, n_groups)]


def flatten_params(p, driver="bm"):
    """Constrained values of ``p`` in ``flat_names`` order."""
    values = []
    for slot in param_slots(p.n_groups, driver):
        value = slot_value(p, slot)
        values += list(value) if slot.kind == FRACTIONS else [value]
    return np.asarray(values, dtype=np.float64)


@dataclass(frozen=True)
class ParamBatch:
    """One parameter set per particle.

    Scalar fields have shape (n,), per-group fields (n, n_groups) and the
    initial fractions (n, n_groups, 3).
    """

    k: np.ndarray
    gamma: np.ndarray
    tau: np.ndarray
    c: np.ndarray
    b: np.ndarray
    ou_rate: np.ndarray
    ou_mean: np.ndarray
    slope0: np.ndarray
    sigma: np.ndarray
    beta0: np.ndarray
    init_fractions: np.ndarray
    population: np.ndarray

    @classmethod
    def from_params(cls, p, n):
        """Broadcast one parameter set to ``n`` particles."""

        def scalar(value):
            return np.full(n, float(value))

        def grouped(value):
            return np.tile(np.asarray(value, dtype=np.float64), (n,) + (1,) * np.ndim(value))

        return cls(
            k=scalar(p.k),
            gamma=scalar(p.gamma),
            tau=scalar(p.tau),
            c=scalar(p.c),
            b=scalar(p.b),
            ou_rate=scalar(p.ou_rate),
            ou_mean=scalar(p.ou_mean),
            slope0=scalar(p.slope0),
            sigma=grouped(p.sigma),
            beta0=grouped(p.beta0),
            init_fractions=grouped(p.init_fractions),
            population=grouped(p.population),
        )

    @property
    def size(self):
        return self.k.shape[0]

    @property
    def n_groups(self):
        return self.population.shape[1]

    def take(self, idx):
        """Batch re-indexed by particle ``idx`` (used after resampling)."""
        return ParamBatch(**{name: value[idx] for name, value in self.__dict__.items()})

    def row(self, j):
        """ParamSet of particle ``j``."""
        return ParamSet(
            k=float(self.k[j]),
            gamma=float(self.gamma[j]),
            tau=float(self.tau[j]),
            c=float(self.c[j]),
            b=float(self.b[j]),
            ou_rate=float(self.ou_rate[j]),
            ou_mean=float(self.ou_mean[j]),
            slope0=float(self.slope0[j]),
            sigma=tuple(float(s) for s in self.sigma[j]),
            beta0=tuple(float(s) for s in self.beta0[j]),
            init_fractions=tuple(tuple(float(f) for f in row) for row in self.init_fractions[j]),
            population=tuple(float(s) for s in self.population[j]),
        )

    def initial_compartments(self):
        """(n, n_groups, 4) array of S, E, I, R in persons."""
        s0 = 1.0 - self.init_fractions.sum(axis=2)
        fractions = np.concatenate([s0[..., None], self.init_fractions], axis=2)
        return fractions * self.population[..., None]
