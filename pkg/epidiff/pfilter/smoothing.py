"""Genealogy smoothing.

Path draws from p(x | y, theta) obtained by tracing the ancestry of terminal
particles. Early parts of the paths coalesce onto few ancestors when the
number of observations is large relative to the number of particles.

"""
from __future__ import annotations

import numpy as np

from epidiff.pfilter.resampling import resample
from epidiff.utils.errors import DegenerateFilterError
from epidiff.utils.rng import make_rng


def trace_lineages(result, terminal):
    """Driver paths of the lineages ending at particles ``terminal``.

    Args:
        result (FilterResult):
            non-degenerate filter output with stored segments
        terminal (np.ndarray):
            indices of particles at the last observation

    Returns:
        np.ndarray: (len(terminal), n_points, n_groups)
    """
    if result.degenerate:
        raise DegenerateFilterError("cannot trace paths of a degenerate filter run")
    if result.segments is None:
        raise DegenerateFilterError("filter was run without storing paths")
    idx = np.asarray(terminal)
    pieces = []
    for i in range(len(result.segments) - 1, -1, -1):
        pieces.append(result.segments[i][idx])
        idx = result.parents[i][idx]
    pieces.append(result.initial_latent[idx][:, None, :])
    return np.concatenate(pieces[::-1], axis=1)


def draw_smoothing_path(result, rng_seed=None):
    """One genealogy path draw and the trajectory it implies.

    Args:
        result (FilterResult):
            non-degenerate filter output
        rng_seed (int | np.random.Generator | None):
            seed or stream

    Returns:
        tuple[LatentPath, StateTrajectory]
    """
    if result.degenerate:
        raise DegenerateFilterError("cannot draw a path from a degenerate filter run")
    rng = make_rng(rng_seed)
    j = resample(result.final_weights, 1, "multinomial", rng)
    x_path = trace_lineages(result, j)[0]
    return result.model.reconstruct(x_path)


def smoothing_mean(result, transform=np.exp):
    """Terminal-weight average of ``transform(x)`` over every lineage, (n_points, n_groups)."""
    paths = trace_lineages(result, np.arange(result.n_particles))
    return np.tensordot(result.final_weights, transform(paths), axes=1)
