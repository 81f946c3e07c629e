"""Priors.

Prior descriptors for every parameter slot, the log prior on the unconstrained
scale (log-Jacobian included) and prior sampling.

Descriptor kinds:
  - ``normal``: normal on the value, or on its inverse when ``on="inverse"``
    (used for the latent and infectious periods); truncated to positivity for
    positive slots. ``band=(lower, upper)`` sets the mean to the midpoint and
    the sd to (upper - lower) / (2 * 1.96).
  - ``vague_positive_normal``: normal(0, 1e3) truncated to positivity.
  - ``dirichlet_moment``: Dirichlet over (S0, E0, I0, R0) whose R component has
    mean ``mean_R`` and variance ``var_R``. With total concentration a0 the R
    variance is mean_R (1 - mean_R) / (a0 + 1), so
    a0 = mean_R (1 - mean_R) / var_R - 1. The remaining mass is split equally
    over S, E and I unless ``mean_E`` / ``mean_I`` are given, in which case S
    takes what is left.
  - ``point_mass``: fixed value, left out of the sampled vector.

"""
from __future__ import annotations

from typing import Literal

import numpy as np
from pydantic import BaseModel
from pydantic import root_validator
from scipy import stats
from scipy.special import gammaln

from epidiff.model.params import FRACTIONS
from epidiff.model.params import POSITIVE
from epidiff.model.params import param_slots
from epidiff.model.params import slot_value
from epidiff.utils.configs.constants import VAGUE_SD
from epidiff.utils.configs.constants import Z95
from epidiff.utils.errors import DomainError


class PriorDescriptor(BaseModel):
    """Prior of one slot."""

    kind: Literal["normal", "vague_positive_normal", "dirichlet_moment", "point_mass"]
    # normal
    mean: float | None = None
    sd: float | None = None
    band: tuple[float, float] | None = None
    # whether the normal applies to the value or to its inverse (periods)
    on: Literal["value", "inverse"] = "value"
    # dirichlet_moment
    mean_R: float | None = None
    var_R: float | None = None
    mean_E: float | None = None
    mean_I: float | None = None
    # point_mass
    value: float | tuple[float, float, float] | None = None

    class Config:
        frozen = True

    @root_validator(skip_on_failure=True)
    def _complete(cls, values):
        kind = values["kind"]
        if kind == "normal":
            band = values.get("band")
            if band is not None:
                lower, upper = band
                if not upper > lower:
                    raise ValueError(f"band must be increasing, got {band}")
                values["mean"] = 0.5 * (lower + upper)
                values["sd"] = (upper - lower) / (2 * Z95)
            if values.get("mean") is None or values.get("sd") is None:
                raise ValueError("normal prior needs mean and sd, or band")
            if not values["sd"] > 0:
                raise ValueError("normal prior sd must be positive")
        elif kind == "vague_positive_normal":
            values["mean"] = 0.0
            values["sd"] = VAGUE_SD if values.get("sd") is None else values["sd"]
        elif kind == "dirichlet_moment":
            values["mean_R"] = 0.15 if values.get("mean_R") is None else values["mean_R"]
            values["var_R"] = values["mean_R"] ** 2 if values.get("var_R") is None else values["var_R"]
        elif values.get("value") is None:
            raise ValueError("point_mass prior needs a value")
        return values

    def concentration(self):
        """Dirichlet concentration over (S0, E0, I0, R0)."""
        mean_r, var_r = self.mean_R, self.var_R
        a0 = mean_r * (1.0 - mean_r) / var_r - 1.0
        if not (0 < mean_r < 1) or a0 <= 0:
            raise DomainError("var_R", f"no Dirichlet has R mean {mean_r} and variance {var_r}")
        rest = 1.0 - mean_r
        if self.mean_E is None and self.mean_I is None:
            means = np.array([rest / 3, rest / 3, rest / 3, mean_r])
        else:
            mean_e = rest / 3 if self.mean_E is None else self.mean_E
            mean_i = rest / 3 if self.mean_I is None else self.mean_I
            means = np.array([rest - mean_e - mean_i, mean_e, mean_i, mean_r])
            if means.min() <= 0:
                raise DomainError("mean_E", f"fraction means must be positive, got {means}")
        return a0 * means


def normal(mean, sd, on="value"):
    return PriorDescriptor(kind="normal", mean=mean, sd=sd, on=on)


def normal_from_band(lower, upper, on="value"):
    """Normal whose central 95% interval is (lower, upper)."""
    return PriorDescriptor(kind="normal", band=(lower, upper), on=on)


def vague_positive_normal(on="value"):
    return PriorDescriptor(kind="vague_positive_normal", on=on)


def dirichlet_moment(mean_R=0.15, var_R=0.15**2, mean_E=None, mean_I=None):
    return PriorDescriptor(kind="dirichlet_moment", mean_R=mean_R, var_R=var_R, mean_E=mean_E, mean_I=mean_I)


def point_mass(value):
    return PriorDescriptor(kind="point_mass", value=value)


class PriorSpec(BaseModel):
    """One descriptor per slot of a model structure."""

    n_groups: int = 1
    driver: str = "bm"
    descriptors: dict[str, PriorDescriptor]

    class Config:
        frozen = True

    @root_validator(skip_on_failure=True)
    def _one_per_slot(cls, values):
        slots = param_slots(values["n_groups"], values["driver"])
        names = {slot.name for slot in slots}
        missing = names - set(values["descriptors"])
        extra = set(values["descriptors"]) - names
        if missing or extra:
            raise ValueError(f"descriptors must cover exactly the slots; missing {sorted(missing)}, unknown {sorted(extra)}")
        for slot in slots:
            kind = values["descriptors"][slot.name].kind
            if (kind == "dirichlet_moment") != (slot.kind == FRACTIONS) and kind != "point_mass":
                raise ValueError(f"{slot.name}: {kind} prior does not fit a {slot.kind} slot")
        return values

    def slots(self):
        return param_slots(self.n_groups, self.driver)

    def sampled_slots(self):
        return [slot for slot in self.slots() if self.descriptors[slot.name].kind != "point_mass"]

    @property
    def dim(self):
        return sum(slot.size for slot in self.sampled_slots())

    def coordinate_names(self):
        """Names of the unconstrained coordinates."""
        names = []
        for slot in self.sampled_slots():
            if slot.kind == FRACTIONS:
                names += [f"alr_{f}{slot.name[len('init_fractions'):]}" for f in ("E0", "I0", "R0")]
            else:
                names.append(f"log_{slot.name}" if slot.kind == POSITIVE else slot.name)
        return names

    def with_descriptor(self, name, descriptor):
        return PriorSpec(n_groups=self.n_groups, driver=self.driver, descriptors={**self.descriptors, name: descriptor})


def build_prior_spec(params, driver="bm", priors=None):
    """Prior spec from explicit descriptors, point masses at ``params`` elsewhere.

    Args:
        params (ParamSet):
            values used for every slot without an explicit descriptor
        driver (str):
            driver kind, decides which optional slots exist
        priors (dict[str, PriorDescriptor | dict] | None):
            explicit descriptors keyed by slot name

    Returns:
        PriorSpec
    """
    priors = priors or {}
    descriptors = {}
    for slot in param_slots(params.n_groups, driver):
        desc = priors.get(slot.name)
        if desc is None:
            descriptors[slot.name] = point_mass(slot_value(params, slot))
        else:
            descriptors[slot.name] = desc if isinstance(desc, PriorDescriptor) else PriorDescriptor(**desc)
    return PriorSpec(n_groups=params.n_groups, driver=driver, descriptors=descriptors)


def tilt_prior(spec, name, pct):
    """Shift the prior mean of slot ``name`` by ``pct`` percent.

    Normal priors move their mean (on the scale they are defined on, so a tilt
    of ``k`` with ``on="inverse"`` moves the mean latent period). Dirichlet
    priors move the R mean and keep the R coefficient of variation.
    """
    desc = spec.descriptors[name]
    factor = 1.0 + pct / 100.0
    if desc.kind == "normal":
        tilted = desc.copy(update={"mean": desc.mean * factor, "band": None})
    elif desc.kind == "dirichlet_moment":
        tilted = desc.copy(update={"mean_R": desc.mean_R * factor, "var_R": desc.var_R * factor**2})
    else:
        raise DomainError(name, f"cannot tilt a {desc.kind} prior")
    return spec.with_descriptor(name, tilted)


def _truncated_normal_logpdf(x, mean, sd):
    return stats.norm.logpdf(x, mean, sd) - stats.norm.logcdf(mean / sd)


def _log_density(desc, kind, u):
    """Log density of one slot on the unconstrained scale."""
    if desc.kind == "dirichlet_moment":
        alpha = desc.concentration()
        log_s0 = -np.logaddexp(0.0, np.logaddexp.reduce(u))
        log_p = np.concatenate([[log_s0], u + log_s0])
        # Dirichlet density times the additive log-ratio Jacobian prod(p)
        return float(gammaln(alpha.sum()) - gammaln(alpha).sum() + np.dot(alpha, log_p))
    u = float(u[0])
    if kind == POSITIVE:
        if desc.on == "inverse":
            # phi = exp(-u), |dphi/du| = phi
            return float(_truncated_normal_logpdf(np.exp(-u), desc.mean, desc.sd) - u)
        return float(_truncated_normal_logpdf(np.exp(u), desc.mean, desc.sd) + u)
    return float(stats.norm.logpdf(u, desc.mean, desc.sd))


def log_prior(v, spec):
    """Log prior of an unconstrained vector, log-Jacobian included.

    Args:
        v (np.ndarray):
            unconstrained coordinates, length ``spec.dim``
        spec (PriorSpec):
            prior descriptors

    Returns:
        float
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (spec.dim,):
        raise DomainError("v", f"expected dimension {spec.dim}, got {v.shape}")
    total = 0.0
    i = 0
    for slot in spec.sampled_slots():
        total += _log_density(spec.descriptors[slot.name], slot.kind, v[i : i + slot.size])
        i += slot.size
    return total


def sample_descriptor(desc, kind, size, rng):
    """Constrained draws from one descriptor; (size,) or (size, 3) for fractions."""
    if desc.kind == "point_mass":
        return np.tile(np.asarray(desc.value, dtype=np.float64), (size, 1) if kind == FRACTIONS else (size,))
    if desc.kind == "dirichlet_moment":
        return rng.dirichlet(desc.concentration(), size=size)[:, 1:]
    if kind == POSITIVE:
        draws = stats.truncnorm.rvs(-desc.mean / desc.sd, np.inf, loc=desc.mean, scale=desc.sd, size=size, random_state=rng)
        return 1.0 / draws if desc.on == "inverse" else draws
    return rng.normal(desc.mean, desc.sd, size=size)


def sample_prior(spec, n, rng):
    """``n`` prior draws on the unconstrained scale, shape (n, spec.dim)."""
    columns = []
    for slot in spec.sampled_slots():
        draws = sample_descriptor(spec.descriptors[slot.name], slot.kind, n, rng)
        if slot.kind == FRACTIONS:
            s0 = 1.0 - draws.sum(axis=1, keepdims=True)
            columns.append(np.log(draws / s0))
        elif slot.kind == POSITIVE:
            columns.append(np.log(draws)[:, None])
        else:
            columns.append(draws[:, None])
    return np.hstack(columns) if columns else np.zeros((n, 0))
