from __future__ import annotations

import logging

import pytest

from epidiff.utils.errors import ConfigError
from epidiff.utils.errors import ConvergenceError
from epidiff.utils.errors import DegenerateFilterError
from epidiff.utils.errors import DegenerateInferenceError
from epidiff.utils.errors import DomainError
from epidiff.utils.errors import EpidiffError
from epidiff.utils.errors import IntegrationError
from epidiff.utils.errors import NumericalError
from epidiff.utils.logging import get_logger
from epidiff.utils.logging import set_log_level


@pytest.mark.parametrize(
    "error, code",
    [
        (EpidiffError("x"), 1),
        (ConfigError("x"), 2),
        (DomainError("tau", "x"), 2),
        (NumericalError("x"), 3),
        (IntegrationError("x"), 3),
        (ConvergenceError("x"), 3),
        (DegenerateFilterError("x"), 4),
        (DegenerateInferenceError("x"), 4),
    ],
)
def test_exit_codes(error, code):
    assert error.exit_code == code
    assert isinstance(error, EpidiffError)


def test_domain_error_names_the_field():
    err = DomainError("sigma", "must be non-negative")
    assert err.field == "sigma"
    assert str(err) == "sigma: must be non-negative"
    with pytest.raises(ValueError):
        raise err


def test_log_level_applies_to_package_loggers():
    logger = get_logger("epidiff.unit")
    set_log_level(logging.DEBUG)
    assert logger.level == logging.DEBUG
    set_log_level(logging.INFO)
    assert logger.level == logging.INFO
