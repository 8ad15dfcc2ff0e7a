import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stratlab.spectral import (Mode, ModeState, SpectralField, frame_shift,
                               gevrey_norm, hermitize, l2_norm,
                               single_mode_field, sobolev_norm,
                               split_zero_mode, symbol_dtp, symbol_p,
                               velocity_from_vorticity, zero_field)

finite = st.floats(min_value=-100, max_value=100, allow_nan=False)


def test_symbol_p_examples():
    assert symbol_p(0.0, 1, 0.0) == 1.0
    assert symbol_p(7.3, 0, 3.0) == 9.0  # k = 0 freezes time dependence
    assert symbol_p(2.0, 1, 2.0) == 1.0


def test_symbol_dtp_examples():
    assert symbol_dtp(3.0, 1, 3.0) == 0.0  # critical time t = eta/k
    assert symbol_dtp(0.0, 1, 1.0) == -2.0
    assert symbol_dtp(3.0, 2, 0.0) == 24.0


@settings(max_examples=200, deadline=None)
@given(t=finite, k=st.integers(-16, 16), eta=finite)
def test_symbol_identities(t, k, eta):
    p = symbol_p(abs(t), k, eta)
    assert p >= k * k
    # time dependence is a pure frequency translation
    assert symbol_p(abs(t), k, eta) == symbol_p(0.0, k, eta - k * abs(t))
    if k != 0:
        assert abs(symbol_dtp(abs(t), k, eta)) <= 2 * abs(k) * math.sqrt(p) \
            * (1 + 1e-12)


def test_velocity_examples():
    ux, uy = velocity_from_vorticity(ModeState(1.0 + 0j, 0j, 0.0), Mode(1, 0.0))
    assert ux == 0.0 and uy == pytest.approx(-1j)
    ux, uy = velocity_from_vorticity(ModeState(0j, 1.0 + 0j, 5.0), Mode(3, 1.0))
    assert ux == 0.0 and uy == 0.0
    ux, uy = velocity_from_vorticity(ModeState(1.0 + 0j, 0j, 0.0), Mode(1, 2.0))
    assert ux == pytest.approx(0.4j) and uy == pytest.approx(-0.2j)
    with pytest.raises(ValueError, match="undetermined mean flow"):
        velocity_from_vorticity(ModeState(1.0 + 0j, 0j, 0.0), Mode(0, 0.0))


def _gauss_field(nk=16, neta=32, deta=0.5, seed=0):
    rng = np.random.default_rng(seed)
    om = rng.normal(size=(nk, neta)) + 1j * rng.normal(size=(nk, neta))
    th = rng.normal(size=(nk, neta)) + 1j * rng.normal(size=(nk, neta))
    f = SpectralField(om, th, deta)
    kg = np.abs(f.k[:, None])
    eg = np.abs(f.eta[None, :])
    damp = np.exp(-(kg ** 2 + eg ** 2))
    return hermitize(f.replace(omega=f.omega * damp, theta=f.theta * damp))


def test_hermitize_and_defect():
    f = _gauss_field()
    assert f.hermitian_defect() < 1e-15


def test_split_zero_mode():
    f = _gauss_field()
    zero, rest = split_zero_mode(f)
    assert np.all(zero.omega[1:] == 0) and np.all(rest.omega[0] == 0)
    np.testing.assert_array_equal(zero.omega + rest.omega, f.omega)
    np.testing.assert_array_equal(zero.theta + rest.theta, f.theta)
    only_zero, r = split_zero_mode(zero)
    np.testing.assert_array_equal(only_zero.omega, zero.omega)
    assert np.all(r.omega == 0) and np.all(r.theta == 0)


def test_l2_and_sobolev_examples():
    f = single_mode_field(8, 8, 1.0, k=1, eta_index=0, omega=1.0,
                          conjugate_partner=False)
    assert l2_norm(f, "omega") == pytest.approx(1.0)
    assert sobolev_norm(f, 2.0, "omega") == pytest.approx(math.sqrt(2.0))
    assert l2_norm(zero_field(8, 8, 1.0), "omega") == 0.0


def test_gevrey_examples():
    f = single_mode_field(8, 8, 1.0, k=1, eta_index=0, omega=1.0,
                          conjugate_partner=False)
    assert gevrey_norm(f, 1.0, 0.5, "omega") == pytest.approx(math.e)
    assert gevrey_norm(zero_field(8, 8, 1.0), 1.0, 0.5, "omega") == 0.0
    # lam = 0 reduces to the plain lattice norm
    g = _gauss_field()
    assert gevrey_norm(g, 0.0, 0.5, "omega") == pytest.approx(
        l2_norm(g, "omega"), rel=1e-14)


def test_gevrey_monotonicity():
    g = _gauss_field()
    n1 = gevrey_norm(g, 0.5, 0.5, "omega")
    n2 = gevrey_norm(g, 1.0, 0.5, "omega")
    assert n2 > n1
    # at fixed lam, weakly increasing in s when support has |k|+|eta| >= 1
    f = single_mode_field(8, 8, 1.0, k=2, eta_index=2, omega=1.0)
    lo = gevrey_norm(f, 0.7, 0.4, "omega")
    hi = gevrey_norm(f, 0.7, 0.9, "omega")
    assert hi >= lo


def test_gevrey_overflow_names_frequency():
    f = single_mode_field(8, 64, 1.0, k=1, eta_index=20, omega=1e-30,
                          conjugate_partner=False)
    with pytest.raises(OverflowError, match=r"Gevrey weight overflow at "
                                            r"\(k=1, eta=20\)"):
        gevrey_norm(f, 20.0, 1.0, "omega")
    # unpopulated large frequencies must not trip the guard
    g = single_mode_field(8, 64, 1.0, k=1, eta_index=0, omega=1.0,
                          conjugate_partner=False)
    assert np.isfinite(gevrey_norm(g, 20.0, 1.0, "omega"))


class TestFrameShift:
    def test_identity_at_t0(self):
        f = _gauss_field()
        for d in ("to_moving", "to_static"):
            g = frame_shift(f, 0.0, d)
            np.testing.assert_array_equal(g.omega, f.omega)

    def test_zero_mode_invariant(self):
        f = single_mode_field(8, 16, 0.5, k=0, eta_index=3, omega=2.0,
                              theta=1.0)
        g = frame_shift(f, 7.7, "to_moving")
        np.testing.assert_array_equal(g.omega, f.omega)
        np.testing.assert_array_equal(g.theta, f.theta)

    def test_exact_lattice_shift(self):
        # k=1 at static xi=0 lands at eta = k*t when k*t is a lattice point
        deta = 0.5
        f = single_mode_field(8, 32, deta, k=1, eta_index=0, omega=1.5 + 0.5j)
        t = 3 * deta  # shift of 3 lattice steps
        g = frame_shift(f, t, "to_moving")
        assert g.omega[1, 3] == f.omega[1, 0]
        assert g.omega[1, 0] == 0
        # Hermitian partner moved symmetrically
        assert g.omega[-1, -3] == f.omega[-1, 0]

    def test_round_trip_bit_exact(self):
        deta = 0.5
        f = _gauss_field(8, 32, deta)
        t = 4 * deta
        g = frame_shift(frame_shift(f, t, "to_moving"), t, "to_static")
        np.testing.assert_array_equal(g.omega, f.omega)
        np.testing.assert_array_equal(g.theta, f.theta)

    @staticmethod
    def _smooth_field(nk=8, neta=64, deta=0.5):
        # rows sampled from a y-localized profile centered in the dual
        # window: the Fourier-phase interpolation is spectrally accurate
        # only for such data (its dual must vanish at the window seam)
        f = zero_field(nk, neta, deta)
        om = f.omega.copy()
        y0 = 0.5 * 2 * np.pi / deta
        for k in (1, 2, 3):
            amp = 1.0 / k
            om[k] = amp * np.exp(-0.25 * f.eta ** 2 - 1j * f.eta * y0)
            om[-k] = np.conj(om[k][(-np.arange(neta)) % neta])
        return f.replace(omega=om)

    def test_fractional_shift_band_limited(self):
        # off-lattice shift then back: spectral interpolation, small error
        f = self._smooth_field()
        g = frame_shift(frame_shift(f, 0.3, "to_moving"), 0.3, "to_static")
        err = np.abs(g.omega - f.omega).max()
        assert err < 1e-12 * np.abs(f.omega).max()

    def test_hermitian_preserved(self):
        f = self._smooth_field()
        g = frame_shift(f, 0.3, "to_moving")
        assert g.hermitian_defect() < 1e-13

    def test_lattice_overflow(self):
        f = single_mode_field(8, 16, 0.5, k=3, eta_index=6, omega=1.0)
        with pytest.raises(ValueError, match="lattice overflow"):
            frame_shift(f, 10.0, "to_moving")

    def test_bad_direction(self):
        with pytest.raises(ValueError):
            frame_shift(_gauss_field(), 1.0, "sideways")
