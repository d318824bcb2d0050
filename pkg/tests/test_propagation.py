import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from uavfronthaul.propagation import (ChannelParams, dbm_to_watts, los_probability, noise_power,
                                      path_loss, path_loss_db, watts_to_dbm)

# Independent scalar evaluation at L = 200 m, 60 GHz, 20 m buildings, frozen before the module existed.
PATH_LOSS_200M_DB = -94.40953670480053


def test_path_loss_golden():
    assert_allclose(path_loss_db(200.0, ChannelParams()), PATH_LOSS_200M_DB, rtol=1e-13)
    assert_allclose(path_loss(200.0, ChannelParams()), 10 ** (PATH_LOSS_200M_DB / 10), rtol=1e-12)


def test_path_loss_monotone():
    h = path_loss(np.array([100.0, 500.0, 1000.0]), ChannelParams())
    assert h[0] > h[1] > h[2]


def test_frequency_doubling_costs_6db():
    a = path_loss_db(300.0, ChannelParams(carrier_frequency=30e9))
    b = path_loss_db(300.0, ChannelParams(carrier_frequency=60e9))
    assert_allclose(a - b, 20 * math.log10(2), rtol=1e-12)


@given(st.floats(10, 5000), st.sampled_from([28e9, 39e9, 60e9, 73e9]))
def test_path_gain_in_unit_interval(length, fc):
    h = path_loss(length, ChannelParams(carrier_frequency=fc))
    assert 0 < h <= 1


def test_path_loss_rejects_non_positive():
    with pytest.raises(ValueError):
        path_loss(0.0, ChannelParams())


def test_los_probability_values():
    p = ChannelParams()
    assert_allclose(los_probability(np.pi / 2, p), 0.99997, atol=1e-5)
    assert_allclose(los_probability(np.radians(p.los_alpha), p), 1 / (1 + p.los_alpha), rtol=1e-14)
    a, b, c = los_probability(np.radians([30.0, 60.0, 85.0]), p)
    assert a < b < c


@given(st.floats(0, np.pi / 2 - 1e-3), st.floats(1e-4, 1e-2))
def test_los_probability_increasing(x, dx):
    p = ChannelParams()
    lo, hi = los_probability(x, p), los_probability(x + dx, p)
    assert 0 < lo < hi < 1


def test_noise_power():
    assert_allclose(noise_power(1.0), 4.0039e-21, rtol=1e-4)
    assert_allclose(watts_to_dbm(noise_power(1.0)), -173.97, atol=0.01)
    assert_allclose(watts_to_dbm(noise_power(100e6, 10.0)), -84.0, atol=0.05)
    assert noise_power(100e6, 10.0, override=1e-12) == 1e-12


def test_dbm_round_trip():
    assert_allclose(dbm_to_watts(30.0), 1.0)
    assert_allclose(watts_to_dbm(dbm_to_watts(-12.5)), -12.5)


def test_channel_validation():
    with pytest.raises(ValueError):
        ChannelParams(los_alpha=120.0)
    with pytest.raises(ValueError):
        ChannelParams(building_height=200.0)
    with pytest.raises(ValueError):
        ChannelParams(noise_power=-1.0)
