from __future__ import annotations

from epidiff.dynamics.grid import TimeGrid
from epidiff.pfilter.benchmark import ESTIMATORS
from epidiff.pfilter.benchmark import ekf_pf_benchmark


def test_one_row_per_estimator(params):
    table = ekf_pf_benchmark(2, params, TimeGrid.regular(8, 7.0, 0.5), n_particles=40, rng_seed=0)
    assert table["estimator"].to_list() == list(ESTIMATORS)
    assert (table["mse"] >= 0).all()
    assert (table["abs_bias"] >= 0).all()
