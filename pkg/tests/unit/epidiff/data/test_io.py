from __future__ import annotations

from dataclasses import replace

import numpy as np
import polars as pl
import pytest

from epidiff.data.io import read_chain
from epidiff.data.io import read_meta
from epidiff.data.io import read_observations
from epidiff.data.io import write_chain
from epidiff.data.io import write_meta
from epidiff.data.io import write_observations
from epidiff.data.io import write_truth
from epidiff.mcmc.sampler import ChainOutput
from epidiff.observation.lognormal import ObservationSeries
from epidiff.utils.errors import ConfigError

PATH_TIMES = np.arange(0.0, 84.5, 0.5)
OBS_TIMES = 7.0 * np.arange(1, 13)


def _chain(n=10, n_groups=1):
    rng = np.random.default_rng(0)
    draws = rng.uniform(size=(n, 3))
    return ChainOutput(
        names=["tau", "sigma", "beta0"],
        draws=draws,
        coordinate_names=["log_tau", "log_sigma"],
        unconstrained=np.log(draws[:, :2]),
        loglik=rng.normal(size=n),
        logprior=rng.normal(size=n),
        accepted=rng.uniform(size=n) < 0.5,
        acc_rate=np.linspace(1, 0.3, n),
        eps=np.ones(n),
        burn_in=2,
        path_iters=np.array([4, 9]),
        paths=rng.normal(size=(2, PATH_TIMES.shape[0], n_groups)),
        incidence=rng.uniform(1, 100, size=(2, 12, n_groups)),
        path_times=PATH_TIMES,
        obs_times=OBS_TIMES,
        meta={"seed_cov": "identity"},
    )


def test_observation_round_trip(tmp_path):
    series = ObservationSeries(times=[7.0, 14.0, 21.0], values=[12.0, np.nan, 30.5])
    write_observations(series, tmp_path / "obs.csv")
    back = read_observations(str(tmp_path / "obs.csv"))
    np.testing.assert_array_equal(back.times, series.times)
    np.testing.assert_array_equal(back.values, series.values)
    assert back.groups == ("",)


def test_two_group_round_trip(tmp_path):
    values = np.array([[5.0, 7.0], [np.nan, 9.0], [4.0, 2.0]])
    series = ObservationSeries(times=[7.0, 14.0, 21.0], values=values, groups=("c", "a"))
    write_observations(series, tmp_path / "obs.csv")
    df = pl.read_csv(tmp_path / "obs.csv")
    assert df.columns == ["time_days", "group", "cases"]
    assert df["group"].to_list()[:2] == ["c", "a"]
    back = read_observations(str(tmp_path / "obs.csv"))
    assert back.groups == ("c", "a")
    np.testing.assert_array_equal(back.values, values)


def test_bad_observation_files(tmp_path):
    with pytest.raises(ConfigError):
        read_observations(str(tmp_path / "missing.csv"))
    pl.DataFrame({"day": [7.0], "cases": [3.0]}).write_csv(tmp_path / "bad.csv")
    with pytest.raises(ConfigError):
        read_observations(str(tmp_path / "bad.csv"))
    pl.DataFrame({"time_days": [7.0], "group": ["x"], "cases": [3.0]}).write_csv(tmp_path / "group.csv")
    with pytest.raises(ConfigError):
        read_observations(str(tmp_path / "group.csv"))


@pytest.mark.parametrize("n_groups", [1, 2])
def test_chain_round_trip(tmp_path, n_groups):
    chain = _chain(n_groups=n_groups)
    write_chain(chain, str(tmp_path), meta={"experiment_id": "unit"})
    back = read_chain(str(tmp_path))
    assert back.names == chain.names
    assert back.coordinate_names == chain.coordinate_names
    assert back.burn_in == 2
    np.testing.assert_allclose(back.draws, chain.draws)
    np.testing.assert_allclose(back.unconstrained, chain.unconstrained)
    np.testing.assert_array_equal(back.accepted, chain.accepted)
    np.testing.assert_array_equal(back.path_iters, chain.path_iters)
    obs_idx = np.searchsorted(PATH_TIMES, OBS_TIMES)
    np.testing.assert_allclose(back.paths, chain.paths[:, obs_idx, :])
    np.testing.assert_allclose(back.incidence, chain.incidence)
    np.testing.assert_array_equal(back.path_times, OBS_TIMES)
    assert back.meta["seed_cov"] == "identity"
    assert back.meta["experiment_id"] == "unit"


def test_chain_without_paths(tmp_path):
    chain = _chain()
    empty = replace(chain, path_iters=np.zeros(0, dtype=np.int64), paths=np.zeros((0, 0, 0)), incidence=np.zeros((0, 0, 0)))
    write_chain(empty, str(tmp_path))
    assert read_chain(str(tmp_path)).paths.shape[0] == 0


def test_incomplete_run_directory(tmp_path):
    with pytest.raises(ConfigError):
        read_chain(str(tmp_path))


def test_meta_is_json_safe(tmp_path):
    write_meta({"value": np.float64(2.5), "bad": float("nan"), "array": np.arange(3)}, tmp_path / "meta.json")
    assert read_meta(tmp_path / "meta.json") == {"value": 2.5, "bad": None, "array": [0, 1, 2]}


def test_truth_files(tmp_path, epidemic, grid):
    write_truth(epidemic, str(tmp_path))
    path = pl.read_csv(tmp_path / "truth_path.csv")
    assert path.columns == ["time_days", "x", "beta"]
    assert path.height == grid.n_points
    np.testing.assert_allclose(path["beta"].to_numpy(), np.exp(path["x"].to_numpy()))
    traj = pl.read_csv(tmp_path / "trajectory.csv")
    assert traj.columns == ["time_days", "group", "S", "E", "I", "R"]
    assert pl.read_csv(tmp_path / "incidence.csv").height == 12
