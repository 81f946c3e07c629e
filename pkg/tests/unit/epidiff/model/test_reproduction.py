from __future__ import annotations

import numpy as np
import pytest

from epidiff.model.reproduction import effective_reproduction
from epidiff.utils.errors import DomainError


def test_fully_susceptible_population():
    assert effective_reproduction(1.3, 1e6, 0.9259259, 1e6) == pytest.approx(1.3 / 0.9259259)


def test_vectorised():
    r_t = effective_reproduction(np.array([1.0, 2.0]), np.array([5e5, 5e5]), 0.5, 1e6)
    np.testing.assert_allclose(r_t, [1.0, 2.0])


def test_invalid_rates():
    with pytest.raises(DomainError):
        effective_reproduction(1.0, 1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        effective_reproduction(1.0, 1.0, 1.0, -1.0)
