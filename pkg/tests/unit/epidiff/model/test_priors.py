from __future__ import annotations

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.integrate import trapezoid

from epidiff.model.priors import PriorSpec
from epidiff.model.priors import build_prior_spec
from epidiff.model.priors import dirichlet_moment
from epidiff.model.priors import log_prior
from epidiff.model.priors import normal
from epidiff.model.priors import normal_from_band
from epidiff.model.priors import point_mass
from epidiff.model.priors import sample_prior
from epidiff.model.priors import tilt_prior
from epidiff.model.priors import vague_positive_normal
from epidiff.utils.rng import make_rng


def test_band_sets_mean_and_sd():
    desc = normal_from_band(1.55, 1.63, on="inverse")
    assert desc.mean == pytest.approx(1.59)
    assert desc.sd == pytest.approx(0.08 / (2 * 1.959963984540054))


def test_dirichlet_matches_moments():
    alpha = dirichlet_moment(0.15, 0.15**2).concentration()
    a0 = alpha.sum()
    assert alpha[-1] / a0 == pytest.approx(0.15)
    assert 0.15 * 0.85 / (a0 + 1) == pytest.approx(0.15**2)
    np.testing.assert_allclose(alpha[:3], alpha[0])


def test_unconstrained_density_integrates_to_one(params):
    for desc, lo, hi in [(normal(1.0, 0.2), -4.0, 1.5), (normal(1.59, 0.02, on="inverse"), -0.6, -0.33)]:
        spec = build_prior_spec(params, "bm", {"k": desc})
        u = np.linspace(lo, hi, 4001)
        density = np.exp([log_prior(np.array([x]), spec) for x in u])
        assert trapezoid(density, u) == pytest.approx(1.0, abs=1e-4)


def test_point_masses_are_not_sampled(params, priors):
    assert build_prior_spec(params).dim == 0
    assert priors.dim == 3
    assert priors.coordinate_names() == ["log_tau", "log_sigma", "log_beta0"]
    spec = priors.with_descriptor("tau", point_mass(0.1))
    assert spec.dim == 2


def test_fraction_slot_has_three_coordinates(params):
    spec = build_prior_spec(params, "bm", {"init_fractions": dirichlet_moment(0.15, 0.0225)})
    assert spec.coordinate_names() == ["alr_E0", "alr_I0", "alr_R0"]
    draws = sample_prior(spec, 200, make_rng(0))
    assert draws.shape == (200, 3)
    assert all(np.isfinite(log_prior(v, spec)) for v in draws[:20])


def test_prior_draws_have_finite_density(params, priors):
    draws = sample_prior(priors, 50, make_rng(1))
    assert np.all(np.isfinite([log_prior(v, priors) for v in draws]))


def test_descriptor_must_fit_slot(params):
    with pytest.raises(ValueError):
        build_prior_spec(params, "bm", {"k": dirichlet_moment()})
    with pytest.raises(ValidationError):
        PriorSpec(descriptors={"k": vague_positive_normal()})


def test_tilt_moves_the_mean(params):
    spec = build_prior_spec(params, "bm", {"gamma": normal_from_band(0.93, 1.23, on="inverse"), "init_fractions": dirichlet_moment(0.15, 0.0225)})
    tilted = tilt_prior(spec, "gamma", 20.0)
    assert tilted.descriptors["gamma"].mean == pytest.approx(1.08 * 1.2)
    assert tilted.descriptors["gamma"].sd == spec.descriptors["gamma"].sd
    shifted = tilt_prior(spec, "init_fractions", -10.0)
    assert shifted.descriptors["init_fractions"].mean_R == pytest.approx(0.135)
    assert tilt_prior(spec, "gamma", 0.0).descriptors["gamma"].mean == spec.descriptors["gamma"].mean


def test_latent_period_draws_match_the_band(params):
    spec = build_prior_spec(params, "bm", {"k": normal_from_band(1.55, 1.63, on="inverse")})
    draws = sample_prior(spec, 200_000, make_rng(2))
    periods = 1.0 / np.exp(draws[:, 0])
    lower, upper = np.quantile(periods, [0.025, 0.975])
    assert lower == pytest.approx(1.55, abs=0.005)
    assert upper == pytest.approx(1.63, abs=0.005)
