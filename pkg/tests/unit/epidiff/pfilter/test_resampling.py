from __future__ import annotations

import numpy as np
import pytest

from epidiff.pfilter.resampling import effective_sample_size
from epidiff.pfilter.resampling import resample
from epidiff.utils.errors import DomainError

WEIGHTS = np.array([0.5, 0.05, 0.2, 0.0, 0.25])


def test_systematic_counts_are_within_one_of_expected():
    n = 40
    for seed in range(20):
        counts = np.bincount(resample(WEIGHTS, n, "systematic", seed), minlength=WEIGHTS.shape[0])
        expected = n * WEIGHTS
        assert np.all(counts >= np.floor(expected)) and np.all(counts <= np.ceil(expected))


def test_multinomial_frequencies():
    idx = resample(WEIGHTS * 3.0, 20_000, "multinomial", 0)
    freq = np.bincount(idx, minlength=WEIGHTS.shape[0]) / 20_000
    np.testing.assert_allclose(freq, WEIGHTS, atol=0.015)
    assert freq[3] == 0


def test_invalid_weights():
    with pytest.raises(DomainError):
        resample(np.zeros(3), 3)
    with pytest.raises(DomainError):
        resample(np.array([1.0, -1.0]), 3)
    with pytest.raises(DomainError):
        resample(np.array([1.0, np.nan]), 3)
    with pytest.raises(DomainError):
        resample(WEIGHTS, 3, "residual")


def test_effective_sample_size():
    assert effective_sample_size(np.zeros(10)) == pytest.approx(10.0)
    assert effective_sample_size(np.array([0.0, -np.inf, -np.inf])) == pytest.approx(1.0)


class _TopUniform:
    """Stream whose uniforms sit just below one."""

    top = np.nextafter(1.0, 0.0)

    def uniform(self, size=None):
        return self.top if size is None else np.full(size, self.top)


def test_trailing_zero_weight_is_never_drawn(monkeypatch):
    monkeypatch.setattr("epidiff.pfilter.resampling.make_rng", lambda seed: _TopUniform())
    weights = np.array([0.1] * 10 + [0.0, 0.0])
    for scheme in ("systematic", "multinomial"):
        idx = resample(weights, 5, scheme)
        assert idx.max() == 9
