"""Model structure.

Which compartmental model is fitted and which diffusion drives its contact
rate. Only the single-group SEIR and the two-age-group SEIR are built in.

"""
from __future__ import annotations

from typing import Literal

import numpy as np
from pydantic import BaseModel

DRIVER_CODES = {"bm": 0, "ibm": 1, "ou": 2, "sigmoid": 3}


class SigmoidSpec(BaseModel):
    """Decreasing sigmoid used as a deterministic contact-rate curve."""

    # contact rate before the drop, per day
    beta_high: float = 1.4
    # contact rate after the drop, per day
    beta_low: float = 0.9
    # day at which the curve is halfway between the two levels
    t_mid: float = 120.0
    # width of the transition in days
    scale: float = 10.0

    def log_beta(self, t):
        """Log contact rate at times ``t``."""
        t = np.asarray(t, dtype=np.float64)
        beta = self.beta_low + (self.beta_high - self.beta_low) / (1.0 + np.exp((t - self.t_mid) / self.scale))
        return np.log(beta)


class ModelSpec(BaseModel):
    """Model kind and driver kind."""

    # seir: one population; seir-2group: children (c) and adults (a) with cross rate b
    kind: Literal["seir", "seir-2group"] = "seir"
    # latent driver of x = log(beta)
    driver: Literal["bm", "ibm", "ou", "sigmoid"] = "bm"
    sigmoid: SigmoidSpec = SigmoidSpec()

    class Config:
        frozen = True

    @property
    def n_groups(self):
        return 2 if self.kind == "seir-2group" else 1

    @property
    def groups(self):
        return group_labels(self.n_groups)

    @property
    def driver_code(self):
        return DRIVER_CODES[self.driver]


def group_labels(n_groups):
    """Group labels used in slot names and data files."""
    return ("c", "a") if n_groups == 2 else ("",)
