import numpy as np
import pytest

from oracles import (
    GENERATING_VALUES,
    MPMATH_TW,
    PUBLISHED_TW_MEAN,
    PUBLISHED_TW_VARIANCE,
    TABLE_TW,
    TW_MEAN,
    TW_VALUES,
    TW_VARIANCE,
    generating_oracle,
    tw_mean_variance,
    tw_oracle,
)


@pytest.mark.parametrize("x", sorted(TW_VALUES))
def test_frozen_tw_values_reproduce(x):
    assert tw_oracle(x) == pytest.approx(TW_VALUES[x], abs=1e-15)
    # resolution independence of the oracle itself
    assert abs(tw_oracle(x, 120) - TW_VALUES[x]) < 1e-13


@pytest.mark.parametrize("x, s, value", GENERATING_VALUES)
def test_frozen_generating_values_reproduce(x, s, value):
    assert generating_oracle(x, s) == pytest.approx(value, abs=1e-15)
    assert abs(generating_oracle(x, s, 90, 120) - value) < 1e-13


def test_generating_oracle_reduces_to_tw():
    assert abs(generating_oracle((0.0,), (0.0,)) - TW_VALUES[0.0]) < 1e-15


def test_oracle_against_published_moments():
    mean, var = tw_mean_variance()
    assert mean == pytest.approx(TW_MEAN, abs=1e-13)
    assert var == pytest.approx(TW_VARIANCE, abs=1e-13)
    assert abs(mean - PUBLISHED_TW_MEAN) < 1e-6
    assert abs(var - PUBLISHED_TW_VARIANCE) < 1e-6


@pytest.mark.parametrize("x", sorted(MPMATH_TW))
def test_oracle_against_high_precision_values(x):
    assert abs(TW_VALUES[x] - MPMATH_TW[x]) < 1e-12


@pytest.mark.parametrize("x", sorted(TABLE_TW))
def test_oracle_against_six_decimal_table(x):
    # the table is only good to about 4e-5
    assert abs(TW_VALUES[x] - TABLE_TW[x]) < 5e-5


def test_oracle_monotone():
    xs = sorted(TW_VALUES)
    assert np.all(np.diff([TW_VALUES[x] for x in xs]) > 0)
