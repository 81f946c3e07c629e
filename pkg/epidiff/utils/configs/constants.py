"""Constants.

Static values used throughout the package: adaptation constants, numerical
tolerances and reporting quantiles.

"""
from __future__ import annotations

import os
from pathlib import Path

preset_dir = str(Path(os.path.dirname(__file__)).parents[1] / "presets")

# adaptive Metropolis
ALPHA1 = 0.999
ALPHA2 = 0.05
TARGET_ACCEPT = 0.234
RW_SCALE = 2.38
# covariance adaptation starts after COV_ADAPT_FACTOR * d iterations
COV_ADAPT_FACTOR = 10
COV_JITTER = 1e-10

# normal quantile of the 95% bands quoted for the period priors
Z95 = 1.959963984540054
VAGUE_SD = 1e3

# compartments may dip this far below zero (times N) before integration fails
CLAMP_TOL = 1e-9
FD_REL_STEP = 1e-6
HESSIAN_REL_STEP = 1e-4
PSD_FLOOR = 1e-10
EK_MCMC_MIN_ACCEPT = 0.01
# unconstrained coordinates are clipped here before decoding so exp stays finite and positive
LOG_CLIP = 700.0
ALR_CLIP = 30.0

QUANTILES = (0.025, 0.25, 0.5, 0.75, 0.975)
QUANTILE_NAMES = ("q2.5", "q25", "q50", "q75", "q97.5")

COMPARTMENTS = ("S", "E", "I", "R")
