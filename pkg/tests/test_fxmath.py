import numpy as np
import pytest

from ftismc_lab.fxmath import (FixedTimeGains, fixed_time_bound,
                               saturated_sign, scalar_settling_time,
                               signed_power)


def test_signed_power_zero():
    assert signed_power(0.0, 0.5) == 0.0
    assert np.all(signed_power(np.zeros(2), 5.0 / 7.0) == 0.0)


def test_signed_power_values():
    assert signed_power(-2.0, 0.5) == pytest.approx(-np.sqrt(2.0))
    assert signed_power(4.0, 0.5) == pytest.approx(2.0)
    out = signed_power(np.array([-1.0, 8.0]), 1.0 / 3.0)
    assert out == pytest.approx([-1.0, 2.0])


def test_signed_power_odd_symmetry():
    rng = np.random.default_rng(3)
    x = rng.uniform(-5.0, 5.0, 50)
    for a in (0.3, 5.0 / 7.0, 1.0, 5.0 / 3.0):
        assert np.allclose(signed_power(-x, a), -signed_power(x, a))


def test_signed_power_scalar_returns_scalar():
    assert isinstance(signed_power(2.0, 0.5), float)
    assert signed_power(np.array([1.0, 2.0]), 2.0).shape == (2,)


def test_signed_power_rejects_bad_input():
    with pytest.raises(ValueError):
        signed_power(1.0, 0.0)
    with pytest.raises(ValueError):
        signed_power(np.nan, 0.5)


def test_fixed_time_bound_value():
    g = FixedTimeGains(lambda1=1.0, lambda2=1.0, alpha=0.5, beta=2.0)
    assert fixed_time_bound(g) == pytest.approx(3.0)


def test_fixed_time_bound_monotone_in_gains():
    base = fixed_time_bound(FixedTimeGains(3.0, 20.0, 5 / 7, 5 / 3))
    stiffer = fixed_time_bound(FixedTimeGains(6.0, 40.0, 5 / 7, 5 / 3))
    assert stiffer < base


def test_gain_validation():
    with pytest.raises(ValueError):
        FixedTimeGains(lambda1=-1.0, lambda2=1.0, alpha=0.5, beta=2.0)
    with pytest.raises(ValueError):
        FixedTimeGains(lambda1=1.0, lambda2=1.0, alpha=1.5, beta=2.0)
    with pytest.raises(ValueError):
        FixedTimeGains(lambda1=1.0, lambda2=1.0, alpha=0.5, beta=0.9)


def test_saturated_sign():
    assert saturated_sign(0.5, 1.0) == pytest.approx(0.5)
    assert saturated_sign(3.0, 1.0) == 1.0
    assert saturated_sign(-3.0, 1.0) == -1.0
    with pytest.raises(ValueError):
        saturated_sign(1.0, 0.0)


def test_scalar_settling_respects_bound():
    # the settling time must stay below the bound for initial conditions
    # spanning five orders of magnitude
    g = FixedTimeGains(lambda1=1.0, lambda2=1.0, alpha=0.5, beta=2.0)
    t_max = fixed_time_bound(g)
    for y0 in (0.01, -1.0, 100.0):
        t = scalar_settling_time(y0, g)
        assert t is not None
        assert t <= t_max
