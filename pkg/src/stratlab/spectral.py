"""Frequency-lattice primitives for the sheared (moving) frame.

Fields live on T x R in the frame z = x - y*t; Fourier labels are an integer
horizontal wavenumber k and a vertical frequency eta sampled on a uniform
symmetric lattice (spacing `eta_spacing`, FFT index ordering on both axes).
The Laplacian in this frame has symbol -p with

    p(t, k, eta) = k^2 + (eta - k*t)^2,   dp/dt = -2*k*(eta - k*t),

the single time-dependent object every other module is built on.

Norms are pure lattice quadratures (rectangle rule in eta): no 2*pi factors,
so a unit-amplitude single mode has unit L^2 norm when eta_spacing = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

__all__ = [
    "Mode", "ModeState", "SpectralField",
    "symbol_p", "symbol_dtp", "velocity_from_vorticity",
    "frame_shift", "split_zero_mode",
    "l2_norm", "sobolev_norm", "gevrey_norm",
    "zero_field", "single_mode_field", "hermitize",
]


@dataclass(frozen=True)
class Mode:
    """One moving-frame frequency pair (k integer, eta real)."""
    k: int
    eta: float


@dataclass(frozen=True)
class ModeState:
    """Vorticity/density coefficients of one mode at time t."""
    omega: complex
    theta: complex
    t: float = 0.0


def symbol_p(t, k, eta):
    """Symbol of the negated moving-frame Laplacian: k^2 + (eta - k t)^2."""
    return k * k + (eta - k * t) ** 2


def symbol_dtp(t, k, eta):
    """Time derivative of the symbol: -2 k (eta - k t)."""
    return -2.0 * k * (eta - k * t)


def velocity_from_vorticity(state: ModeState, mode: Mode):
    """Moving-frame velocity coefficients (u_x, u_y) of a single mode.

    From stream = -omega/p and u = perp-gradient of the stream function:
    u_x = i (eta - k t) omega / p, u_y = -i k omega / p.
    """
    if mode.k == 0 and mode.eta == 0:
        raise ValueError("undetermined mean flow: velocity of the (0,0) mode "
                         "is not defined by the vorticity")
    p = symbol_p(state.t, mode.k, mode.eta)
    ux = 1j * (mode.eta - mode.k * state.t) * state.omega / p
    uy = -1j * mode.k * state.omega / p
    return ux, uy


@dataclass(frozen=True)
class SpectralField:
    """Dense complex coefficient tables for (omega, theta) on the lattice.

    Arrays are indexed [k_index, eta_index] in FFT ordering; `k` holds the
    integer wavenumbers fftfreq(nk)*nk and `eta` the lattice frequencies
    fftfreq(neta)*neta*eta_spacing. Values are immutable by convention:
    every operation returns a new field.
    """

    omega: np.ndarray
    theta: np.ndarray
    eta_spacing: float
    k: np.ndarray = dc_field(init=False, repr=False, compare=False)
    eta: np.ndarray = dc_field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.omega.shape != self.theta.shape or self.omega.ndim != 2:
            raise ValueError("omega/theta tables must share a 2-d shape")
        if not (self.eta_spacing > 0):
            raise ValueError("eta_spacing must be > 0")
        nk, neta = self.omega.shape
        object.__setattr__(self, "k",
                           np.rint(np.fft.fftfreq(nk) * nk).astype(np.int64))
        object.__setattr__(self, "eta",
                           np.fft.fftfreq(neta) * neta * self.eta_spacing)
        self.omega.setflags(write=False)
        self.theta.setflags(write=False)

    @property
    def nk(self) -> int:
        return self.omega.shape[0]

    @property
    def neta(self) -> int:
        return self.omega.shape[1]

    def kgrid(self):
        """k broadcast to table shape, as float."""
        return self.k[:, None].astype(float)

    def etagrid(self):
        """eta broadcast to table shape."""
        return self.eta[None, :] + np.zeros((self.nk, 1))

    def hermitian_defect(self) -> float:
        """Max |f(-k,-eta) - conj f(k,eta)| over both tables."""
        d = 0.0
        for a in (self.omega, self.theta):
            flipped = a[np.ix_((-np.arange(self.nk)) % self.nk,
                               (-np.arange(self.neta)) % self.neta)]
            d = max(d, float(np.abs(flipped - np.conj(a)).max()))
        return d

    def replace(self, omega=None, theta=None) -> "SpectralField":
        return SpectralField(
            omega=self.omega.copy() if omega is None else omega,
            theta=self.theta.copy() if theta is None else theta,
            eta_spacing=self.eta_spacing,
        )


def zero_field(nk: int, neta: int, eta_spacing: float) -> SpectralField:
    return SpectralField(np.zeros((nk, neta), complex),
                         np.zeros((nk, neta), complex), eta_spacing)


def hermitize(field: SpectralField) -> SpectralField:
    """Project onto Hermitian-symmetric tables (real physical fields)."""
    def sym(a):
        ki = (-np.arange(field.nk)) % field.nk
        ei = (-np.arange(field.neta)) % field.neta
        return 0.5 * (a + np.conj(a[np.ix_(ki, ei)]))
    return field.replace(omega=sym(field.omega), theta=sym(field.theta))


def single_mode_field(nk, neta, eta_spacing, k, eta_index, omega=0j, theta=0j,
                      conjugate_partner=True) -> SpectralField:
    """Field with one populated mode (and its Hermitian partner by default)."""
    om = np.zeros((nk, neta), complex)
    th = np.zeros((nk, neta), complex)
    ki, ei = k % nk, eta_index % neta
    om[ki, ei] = omega
    th[ki, ei] = theta
    if conjugate_partner and (ki, ei) != ((-k) % nk, (-eta_index) % neta):
        om[(-k) % nk, (-eta_index) % neta] = np.conj(omega)
        th[(-k) % nk, (-eta_index) % neta] = np.conj(theta)
    return SpectralField(om, th, eta_spacing)


def split_zero_mode(field: SpectralField):
    """Split into the k = 0 column and everything else; parts sum to the input."""
    zom = np.zeros_like(field.omega)
    zth = np.zeros_like(field.theta)
    zom[0, :] = field.omega[0, :]
    zth[0, :] = field.theta[0, :]
    nom = field.omega.copy()
    nth = field.theta.copy()
    nom[0, :] = 0.0
    nth[0, :] = 0.0
    return field.replace(omega=zom, theta=zth), field.replace(omega=nom, theta=nth)


def _component(field: SpectralField, component: str) -> np.ndarray:
    try:
        return {"omega": field.omega, "theta": field.theta}[component]
    except KeyError:
        raise ValueError(f"unknown component {component!r}") from None


def l2_norm(field: SpectralField, component="omega", weight=None) -> float:
    """Plancherel lattice norm sqrt(deta * sum w |f|^2); optional weight table."""
    a2 = np.abs(_component(field, component)) ** 2
    if weight is not None:
        a2 = a2 * weight
    return math.sqrt(field.eta_spacing * float(a2.sum()))


def sobolev_norm(field: SpectralField, order: float, component="omega") -> float:
    """Norm with weight (1 + k^2 + eta^2)^(order/2) on the lattice labels."""
    w = (1.0 + field.kgrid() ** 2 + field.etagrid() ** 2) ** (order / 2.0)
    return l2_norm(field, component, weight=w)


_EXP_MAX = 700.0  # log of float64 overflow threshold, with margin


def gevrey_norm(field: SpectralField, lam: float, s: float,
                component="omega") -> float:
    """Gevrey-1/s lattice norm: sqrt(deta * sum exp(2 lam (|k|+|eta|)^s) |f|^2).

    s = 1 is analytic-type weighting, s = 1/2 the Gevrey-2 scale on which the
    nonlinear theory operates. Raises on exponent overflow at any populated
    frequency, naming the offending (k, eta).
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    if not (0 < s <= 1):
        raise ValueError("s must lie in (0, 1]")
    a = _component(field, component)
    expo = 2.0 * lam * (np.abs(field.kgrid()) + np.abs(field.etagrid())) ** s
    populated = np.abs(a) > 0
    bad = populated & (expo > _EXP_MAX)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise OverflowError(
            f"Gevrey weight overflow at (k={field.k[i]}, eta={field.eta[j]:g})")
    expo = np.where(populated, expo, 0.0)  # silence exp() off the support
    a2 = np.where(populated, np.abs(a) ** 2 * np.exp(expo), 0.0)
    return math.sqrt(field.eta_spacing * float(a2.sum()))


def _column_shift_samples(field: SpectralField, t: float, direction: str):
    sign = {"to_moving": 1.0, "to_static": -1.0}.get(direction)
    if sign is None:
        raise ValueError("direction must be 'to_moving' or 'to_static'")
    return sign * field.k.astype(float) * t / field.eta_spacing


def frame_shift(field: SpectralField, t: float, direction: str,
                overflow_tol: float = 1e-10) -> SpectralField:
    """Re-index eta labels between static and moving frames (eta = xi + k t).

    Lattice-multiple shifts are exact index rolls; fractional shifts use
    band-limited (FFT-phase) interpolation. Either way the shift is circular,
    so coefficients carrying more than `overflow_tol` of the total energy in
    the wrap region abort with a lattice-overflow error.

    A fractional shift multiplies the dual (y) profile by a phase whose
    branch cut must sit somewhere on the periodic y window; it is placed at
    the box seam y = 0, so fields must be supported away from the seam (the
    same requirement the channel truncation already imposes). For even nk
    the k Nyquist row aliases +-nk/2 and has no orientation; it is left in
    place (dealiased data keeps it empty).
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    shifts = _column_shift_samples(field, t, direction)
    if field.nk % 2 == 0:
        shifts[field.nk // 2] = 0.0
    neta = field.neta
    total = float((np.abs(field.omega) ** 2 + np.abs(field.theta) ** 2).sum())

    om = field.omega.copy()
    th = field.theta.copy()
    if total > 0:
        wrapped = 0.0
        centered = np.fft.fftshift(np.abs(om) ** 2 + np.abs(th) ** 2, axes=1)
        for i, s in enumerate(shifts):
            m = min(int(math.ceil(abs(s))), neta)
            if m == 0:
                continue
            row = centered[i]
            wrapped += float(row[-m:].sum() if s > 0 else row[:m].sum())
        if wrapped > overflow_tol * total:
            raise ValueError(
                "lattice overflow: frame shift pushes energy-carrying "
                "coefficients outside the eta lattice")

    rolled = np.rint(shifts)
    exact = np.abs(shifts - rolled) < 1e-12 * np.maximum(1.0, np.abs(shifts))
    phase_m = np.arange(neta)  # dual index on [0, n): branch cut at y = 0
    for i, s in enumerate(shifts):
        if s == 0.0:
            continue
        if exact[i]:
            m = int(rolled[i])
            om[i] = np.roll(om[i], m)
            th[i] = np.roll(th[i], m)
        else:
            ph = np.exp(2j * np.pi * s * phase_m / neta)
            om[i] = np.fft.fft(np.fft.ifft(om[i]) * ph)
            th[i] = np.fft.fft(np.fft.ifft(th[i]) * ph)
    return field.replace(omega=om, theta=th)
