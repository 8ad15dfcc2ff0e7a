import math

import pytest

from stratlab.params import (PhysicalParams, dissipation_rate,
                             energy_envelope_constant)


def test_validation():
    with pytest.raises(ValueError, match="beta must be > 0"):
        PhysicalParams(beta=-1.0)
    with pytest.raises(ValueError):
        PhysicalParams(beta=1.0, nu=-0.1)
    with pytest.raises(ValueError):
        PhysicalParams(beta=1.0, kappa=float("nan"))


def test_miles_howard_matches_half_threshold():
    # beta^2 > 1/4 and beta > 1/2 are the same statement
    for beta in (0.4, 0.499, 0.5, 0.51, 1.0, 10.0):
        p = PhysicalParams(beta=beta)
        assert p.miles_howard == (beta > 0.5)


def test_enhanced_condition():
    assert PhysicalParams(beta=1.0, nu=0.01, kappa=0.01).enhanced_ok
    # ratio 3 against limit 4*beta-1 = 3: strict inequality fails
    assert not PhysicalParams(beta=1.0, nu=0.03, kappa=0.01).enhanced_ok
    assert PhysicalParams(beta=1.1, nu=0.03, kappa=0.01).enhanced_ok
    assert not PhysicalParams(beta=1.0, nu=0.01).enhanced_ok  # kappa = 0


def test_envelope_constant_value():
    # beta = 1: C^2 = 3 e
    assert energy_envelope_constant(1.0) ** 2 == pytest.approx(3.0 * math.e,
                                                               rel=1e-14)
    # large beta limit: C -> 1 (pure-wave regime)
    assert energy_envelope_constant(1e6) == pytest.approx(1.0, abs=1e-5)
    with pytest.raises(ValueError):
        energy_envelope_constant(0.5)


def test_dissipation_rate_value():
    # nu = kappa = 0.01, beta = 1: 0.01 * (1 - 1/4 - 1/4) = 0.005
    p = PhysicalParams(beta=1.0, nu=0.01, kappa=0.01)
    assert dissipation_rate(p) == pytest.approx(0.005, rel=1e-14)
    # equivalent min(nu,kappa)-form for unequal coefficients
    q = PhysicalParams(beta=2.0, nu=0.02, kappa=0.01)
    expect = 0.01 * (1 - 1 / 8.0 - 2.0 / 8.0)
    assert dissipation_rate(q) == pytest.approx(expect, rel=1e-14)
    with pytest.raises(ValueError):
        dissipation_rate(PhysicalParams(beta=1.0, nu=0.01))
