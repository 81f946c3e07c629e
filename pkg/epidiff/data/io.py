"""Data IO.

CSV and JSON persistence of observation series, simulated truth, chains and
reports. Tables are written with polars; every CSV written here can be read
back by the matching reader.

Observation CSVs have the columns ``time_days``, ``cases`` and, for the
two-group model, ``group`` (``c`` or ``a``). An empty ``cases`` cell is a
missing week.

"""
from __future__ import annotations

import json
import os

import numpy as np
import polars as pl

from epidiff.mcmc.sampler import ChainOutput
from epidiff.model.structure import group_labels
from epidiff.observation.lognormal import ObservationSeries
from epidiff.utils.errors import ConfigError
from epidiff.utils.logging import get_logger

logger = get_logger(__name__)

GROUP_ORDER = ("c", "a")
COORD_PREFIX = "v_"


def _long(times, values, groups, name):
    """(n, g) values to a long frame with a group column when g > 1."""
    frames = []
    for g, label in enumerate(groups):
        frame = pl.DataFrame({"time_days": np.asarray(times, dtype=np.float64), name: values[:, g]})
        if len(groups) > 1:
            frame = frame.with_columns(pl.lit(label).alias("group"))
        frames.append(frame)
    return pl.concat(frames)


def write_observations(series, path):
    """Write an observation series; missing weeks become empty cells."""
    df = _long(series.times, series.values, series.groups, "cases").with_columns(pl.col("cases").fill_nan(None))
    if series.n_groups > 1:
        df = df.select(["time_days", "group", "cases"]).sort(["time_days", "group"], descending=[False, True])
    df.write_csv(path)
    logger.info(f"wrote {series.n_obs} observations to {path}")


def read_observations(path):
    """Read an observation CSV into an ObservationSeries.

    Args:
        path (str):
            CSV with ``time_days``, ``cases`` and optionally ``group``

    Returns:
        ObservationSeries
    """
    if not os.path.exists(path):
        raise ConfigError(f"data file {path} does not exist")
    df = pl.read_csv(path)
    missing = {"time_days", "cases"} - set(df.columns)
    if missing:
        raise ConfigError(f"{path}: missing columns {sorted(missing)}")
    df = df.with_columns(pl.col("time_days").cast(pl.Float64), pl.col("cases").cast(pl.Float64).fill_null(np.nan))
    if "group" not in df.columns:
        df = df.sort("time_days")
        return ObservationSeries(times=df["time_days"].to_numpy(), values=df["cases"].to_numpy())
    labels = set(df["group"].unique().to_list())
    if labels - set(GROUP_ORDER):
        raise ConfigError(f"{path}: group must be one of {GROUP_ORDER}, got {sorted(labels)}")
    groups = tuple(g for g in GROUP_ORDER if g in labels)
    times = np.sort(df["time_days"].unique().to_numpy())
    values = np.full((times.shape[0], len(groups)), np.nan)
    for g, label in enumerate(groups):
        part = df.filter(pl.col("group") == label).sort("time_days")
        idx = np.searchsorted(times, part["time_days"].to_numpy())
        values[idx, g] = part["cases"].to_numpy()
    return ObservationSeries(times=times, values=values, groups=groups)


def write_truth(epidemic, out_dir):
    """Driver path, compartments and weekly incidence of a simulated epidemic."""
    grid = epidemic.trajectory.grid
    labels = [label or "all" for label in group_labels(epidemic.path.n_groups)]
    path_df = _long(grid.points, epidemic.path.x, labels, "x").with_columns(pl.col("x").exp().alias("beta"))
    comp = epidemic.trajectory.compartments
    frames = []
    for g, label in enumerate(labels):
        frames.append(
            pl.DataFrame({"time_days": grid.points, "group": [label] * grid.n_points, **{c: comp[:, g, j] for j, c in enumerate("SEIR")}})
        )
    traj_df = pl.concat(frames)
    inc_df = _long(grid.obs_times, epidemic.trajectory.incidence, labels, "incidence")
    path_df.write_csv(f"{out_dir}/truth_path.csv")
    traj_df.write_csv(f"{out_dir}/trajectory.csv")
    inc_df.write_csv(f"{out_dir}/incidence.csv")


def chain_frame(chain):
    """One row per iteration: diagnostics, constrained draws and coordinates."""
    columns = {
        "iteration": np.arange(chain.n_iters),
        "loglik": chain.loglik,
        "logprior": chain.logprior,
        "accepted": chain.accepted,
        "acc_rate": chain.acc_rate,
        "eps": chain.eps,
    }
    columns.update({name: chain.draws[:, j] for j, name in enumerate(chain.names)})
    columns.update({COORD_PREFIX + name: chain.unconstrained[:, j] for j, name in enumerate(chain.coordinate_names)})
    return pl.DataFrame(columns)


def paths_frame(chain):
    """Stored smoothing draws at the observation times, long format."""
    if chain.paths.shape[0] == 0:
        return pl.DataFrame(schema={"iteration": pl.Int64, "time_days": pl.Float64, "group": pl.Utf8, "x": pl.Float64, "incidence": pl.Float64})
    obs_idx = np.searchsorted(chain.path_times, chain.obs_times)
    n_paths, n_obs, n_groups = chain.incidence.shape
    labels = [label or "all" for label in group_labels(n_groups)]
    x = chain.paths[:, obs_idx, :]
    return pl.DataFrame(
        {
            "iteration": np.repeat(chain.path_iters, n_obs * n_groups),
            "time_days": np.tile(np.repeat(chain.obs_times, n_groups), n_paths),
            "group": np.tile(labels, n_paths * n_obs),
            "x": x.ravel(),
            "incidence": chain.incidence.ravel(),
        }
    )


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def write_meta(meta, path):
    with open(path, "w") as f:
        json.dump(_jsonable(meta), f, indent=2)


def read_meta(path):
    with open(path) as f:
        return json.load(f)


def write_chain(chain, out_dir, meta=None):
    """draws.csv, paths.csv and meta.json for a chain."""
    os.makedirs(out_dir, exist_ok=True)
    chain_frame(chain).write_csv(f"{out_dir}/draws.csv")
    paths_frame(chain).write_csv(f"{out_dir}/paths.csv")
    write_meta(
        {
            **chain.meta,
            **(meta or {}),
            "names": chain.names,
            "coordinate_names": chain.coordinate_names,
            "burn_in": chain.burn_in,
            "path_times": chain.path_times,
            "obs_times": chain.obs_times,
        },
        f"{out_dir}/meta.json",
    )
    logger.info(f"wrote chain of {chain.n_iters} iterations to {out_dir}")


def read_chain(run_dir):
    """Rebuild a ChainOutput from ``write_chain`` files.

    Paths come back at the observation times only, so ``path_times`` equals
    ``obs_times``.
    """
    for name in ("draws.csv", "paths.csv", "meta.json"):
        if not os.path.exists(f"{run_dir}/{name}"):
            raise ConfigError(f"{run_dir} has no {name}")
    meta = read_meta(f"{run_dir}/meta.json")
    draws = pl.read_csv(f"{run_dir}/draws.csv")
    names = meta["names"]
    coords = meta["coordinate_names"]
    obs_times = np.asarray(meta["obs_times"], dtype=np.float64)
    paths_df = pl.read_csv(f"{run_dir}/paths.csv")
    if paths_df.height:
        path_iters = np.sort(paths_df["iteration"].unique().to_numpy())
        n_groups = paths_df["group"].n_unique()
        labels = [label or "all" for label in group_labels(n_groups)]
        paths_df = paths_df.with_columns(pl.col("group").map_dict({label: g for g, label in enumerate(labels)}).alias("g"))
        paths_df = paths_df.sort(["iteration", "time_days", "g"])
        shape = (path_iters.shape[0], obs_times.shape[0], n_groups)
        paths = paths_df["x"].to_numpy().reshape(shape)
        incidence = paths_df["incidence"].to_numpy().reshape(shape)
    else:
        path_iters = np.zeros(0, dtype=np.int64)
        paths = incidence = np.zeros((0, 0, 0))
    return ChainOutput(
        names=names,
        draws=draws.select(names).to_numpy().astype(np.float64).reshape(draws.height, len(names)),
        coordinate_names=coords,
        unconstrained=draws.select([COORD_PREFIX + c for c in coords]).to_numpy().astype(np.float64).reshape(draws.height, len(coords)),
        loglik=draws["loglik"].to_numpy(),
        logprior=draws["logprior"].to_numpy(),
        accepted=draws["accepted"].to_numpy(),
        acc_rate=draws["acc_rate"].to_numpy(),
        eps=draws["eps"].to_numpy(),
        burn_in=int(meta["burn_in"]),
        path_iters=path_iters,
        paths=paths,
        incidence=incidence,
        path_times=obs_times,
        obs_times=obs_times,
        meta=meta,
    )
