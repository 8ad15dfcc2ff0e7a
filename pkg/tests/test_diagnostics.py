import math

import numpy as np
import pytest

from stratlab.diagnostics import (NormSeries, ScalarSeries, check_envelope,
                                  check_instability_lower_bound,
                                  fit_power_law)
from stratlab.params import PhysicalParams, energy_envelope_constant


def _series(label, t, v):
    return NormSeries(label, np.asarray(t, float), np.asarray(v, float))


class TestSeriesValidation:
    def test_monotone_times(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            _series("x", [1.0, 1.0], [1.0, 2.0])

    def test_finite(self):
        with pytest.raises(ValueError, match="finite"):
            _series("x", [1.0, 2.0], [1.0, float("inf")])

    def test_nonnegative_only_for_norms(self):
        with pytest.raises(ValueError, match="nonnegative"):
            _series("x", [1.0, 2.0], [1.0, -2.0])
        s = ScalarSeries("x", np.array([1.0, 2.0]), np.array([1.0, -2.0]))
        assert s.value[1] == -2.0


class TestFitPowerLaw:
    def test_exact_decay(self):
        t = np.linspace(1, 100, 50)
        fit = fit_power_law(_series("x", t, t ** -1.5), 1.0, 100.0)
        assert fit.exponent == pytest.approx(-1.5, abs=1e-12)
        assert fit.stderr < 1e-10

    def test_exact_growth(self):
        t = np.linspace(1, 100, 50)
        fit = fit_power_law(_series("x", t, np.sqrt(t)), 1.0, 100.0)
        assert fit.exponent == pytest.approx(0.5, abs=1e-12)

    def test_scale_invariance(self):
        t = np.linspace(5, 80, 40)
        v = t ** -0.7 * (1 + 0.01 * np.sin(t))
        f1 = fit_power_law(_series("x", t, v), 5.0, 80.0)
        f2 = fit_power_law(_series("x", t, 37.0 * v), 5.0, 80.0)
        assert f1.exponent == pytest.approx(f2.exponent, abs=1e-13)

    def test_needs_samples_and_positivity(self):
        t = np.linspace(1, 10, 20)
        with pytest.raises(ValueError, match="at least 8"):
            fit_power_law(_series("x", t, t), 9.0, 10.0)
        v = t.copy()
        v[5] = 0.0
        with pytest.raises(ValueError, match="log of nonpositive value"):
            fit_power_law(_series("x", t, v), 1.0, 10.0)


class TestCheckEnvelope:
    def test_constant_equality(self):
        s = _series("x", [1.0, 2.0, 3.0], [2.0, 2.0, 2.0])
        rep = check_envelope(s, lambda t: 2.0, "upper")
        assert rep.passed and rep.margin == pytest.approx(1.0)

    def test_comfortable_upper(self):
        t = np.linspace(1, 50, 30)
        s = _series("x", t, t ** -0.5)
        rep = check_envelope(s, lambda tt: 2.0 * tt ** -0.5, "upper")
        assert rep.passed and rep.margin == pytest.approx(0.5)

    def test_lower_violation(self):
        s = _series("x", [1.0, 2.0], [1.0, 0.5])
        rep = check_envelope(s, lambda t: 0.9, "lower")
        assert not rep.passed and rep.worst_t == 2.0

    def test_rescale_invariance(self):
        t = np.linspace(1, 20, 25)
        v = np.exp(-0.1 * t)
        for a in (1.0, 1e-6, 1e6):
            rep = check_envelope(_series("x", t, a * v),
                                 lambda tt: a * 1.5 * math.exp(-0.1 * tt),
                                 "upper")
            assert rep.passed and rep.margin == pytest.approx(1 / 1.5,
                                                              rel=1e-12)

    def test_zero_against_zero(self):
        s = _series("x", [1.0, 2.0], [0.0, 0.0])
        rep = check_envelope(s, lambda t: 0.0, "upper")
        assert rep.passed


class TestInstabilityLowerBound:
    def test_constructed_pass(self):
        p = PhysicalParams(beta=1.0)
        t = np.linspace(1, 100, 40)
        growth = (1 + t ** 2) ** 0.25
        rep = check_instability_lower_bound(
            _series("omega", t, growth), _series("gt", t, 0 * t), 1.0, p)
        assert rep.passed
        assert rep.margin == pytest.approx(energy_envelope_constant(1.0),
                                           rel=1e-12)

    def test_decaying_fails_meaningfully(self):
        # a decaying series drops below any t^(1/2) floor: tiny c, sub-unity
        p = PhysicalParams(beta=1.0)
        t = np.linspace(1, 200, 60)
        rep = check_instability_lower_bound(
            _series("omega", t, 1.0 / t), _series("gt", t, 0 * t), 1.0, p)
        assert rep.margin < 0.05

    def test_grid_mismatch(self):
        p = PhysicalParams(beta=1.0)
        with pytest.raises(ValueError, match="time grid"):
            check_instability_lower_bound(
                _series("a", [1.0, 2.0], [1.0, 1.0]),
                _series("b", [1.0, 3.0], [1.0, 1.0]), 1.0, p)

    def test_solver_output_passes(self):
        # generic Gaussian data through the linear lattice evolution
        from stratlab.linear import evolve_field_linear
        from stratlab.sim import gaussian_density_field
        from stratlab.spectral import l2_norm, sobolev_norm, split_zero_mode
        params = PhysicalParams(beta=2.0)
        f0 = gaussian_density_field(32, 64, 4 * math.pi, 1e-2, 1.0)
        _, f0_neq = split_zero_mode(f0)
        # low-frequency size of the data: |omega|_{H^-1} + |theta|_{L^2}
        initial = (sobolev_norm(f0_neq, -1.0, "omega")
                   + l2_norm(f0_neq, "theta"))
        times = np.linspace(0.0, 60.0, 40)[1:]
        _, norms = evolve_field_linear(f0, params, times, tol=1e-8,
                                       keep_fields=False)
        rep = check_instability_lower_bound(norms["omega_neq"],
                                            norms["grad_theta_neq"],
                                            initial, params)
        assert rep.passed and rep.margin > 0
