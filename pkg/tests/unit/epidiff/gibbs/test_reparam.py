from __future__ import annotations

import numpy as np
import pytest

from epidiff.dynamics.drivers import simulate_driver
from epidiff.gibbs.particle_gibbs import path_logdensity
from epidiff.gibbs.reparam import ReparamPath
from epidiff.gibbs.reparam import chib_inverse
from epidiff.gibbs.reparam import chib_reparam
from epidiff.gibbs.reparam import girsanov_logdensity
from epidiff.gibbs.reparam import lamperti_inverse
from epidiff.gibbs.reparam import lamperti_transform
from epidiff.utils.errors import DomainError


@pytest.fixture(scope="module")
def ou_params(params):
    return params.replace(ou_rate=0.2, ou_mean=float(np.log(1.1)))


def test_lamperti_round_trip(params, grid):
    path = simulate_driver("bm", params, grid, 0)
    u = lamperti_transform(path, params)
    assert np.all(u.values[0] == 0)
    np.testing.assert_allclose(u.values, (path.x - path.x[0]) / 0.07)
    np.testing.assert_allclose(lamperti_inverse(u, params).x, path.x, atol=1e-12)


def test_chib_round_trip(params, ou_params, grid):
    for p, driver in ((params, "bm"), (ou_params, "ou")):
        path = simulate_driver(driver, p, grid, 1)
        w = chib_reparam(path, p, driver)
        assert np.all(w.values[0] == 0)
        np.testing.assert_allclose(chib_inverse(w, p, driver).x, path.x, atol=1e-10)


def test_increments_sum_to_lamperti_path_without_drift(params, grid):
    path = simulate_driver("bm", params, grid, 2)
    w = chib_reparam(path, params)
    np.testing.assert_allclose(np.cumsum(w.values, axis=0), lamperti_transform(path, params).values, atol=1e-10)


def test_chib_increments_are_standardised(params, grid):
    # increments of a unit-volatility path scale with the step
    path = simulate_driver("bm", params, grid, 3)
    w = chib_reparam(path, params).values[1:, 0]
    assert np.var(w) / 0.5 == pytest.approx(1.0, abs=0.35)


def test_girsanov(params, ou_params, grid):
    u = lamperti_transform(simulate_driver("bm", params, grid, 4), params)
    assert girsanov_logdensity(u, params) == 0.0
    path = simulate_driver("ou", ou_params, grid, 5)
    u = lamperti_transform(path, ou_params)
    expected = path_logdensity(path, ou_params, "ou") - path_logdensity(path, ou_params, "bm")
    assert girsanov_logdensity(u, ou_params, "ou") == pytest.approx(expected)
    assert girsanov_logdensity(u, ou_params, nu=lambda values: np.zeros_like(values)) == 0.0


def test_invalid_inputs(params, grid):
    path = simulate_driver("bm", params, grid, 6)
    with pytest.raises(DomainError):
        girsanov_logdensity(chib_reparam(path, params), params, "ou")
    with pytest.raises(DomainError):
        lamperti_transform(path, params.replace(sigma=(0.0,)))
    with pytest.raises(DomainError):
        chib_reparam(path, params, "ibm")
    with pytest.raises(DomainError):
        ReparamPath(grid=grid, values=path.x, kind="centred", x0=path.x[0])
