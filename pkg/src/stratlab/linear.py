"""Exact per-mode integration of the linearized moving-frame system.

Per mode (k, eta) the linearization reads

    d/dt omega = -i beta^2 k theta - nu p omega,
    d/dt theta = -(i k / p) omega  - kappa p theta,

with p = k^2 + (eta - k t)^2. Weighting with the quarter powers of p/k^2,

    Z = (p/k^2)^(-1/4) omega,     Q = (p/k^2)^(1/4) i k beta theta,

symmetrizes the coupling; |Z|^2 + |Q|^2 is trapped inside a two-sided
envelope in the inviscid case and decays like exp(-rate k^2 t^3 / 12) when
viscosity and diffusivity are comparable. The checks in this module verify
those envelopes sample-by-sample; integration happens in the original
(omega, theta) variables, where the dissipative terms are diagonal and the
k -> 0 limit is regular (the symmetric weights are diagnostics only).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .diagnostics import CheckReport, NormSeries
from .params import PhysicalParams, dissipation_rate, energy_envelope_constant
from .spectral import Mode, ModeState, SpectralField, symbol_dtp, symbol_p

__all__ = [
    "IntegratorStall", "SymmetricState", "EnergyRecord", "GoodUnknown",
    "to_symmetric", "from_symmetric", "evolve_mode", "mode_trajectory",
    "energy_functional", "check_energy_envelope", "good_unknown",
    "check_vorticity_decay", "evolve_field_linear",
    "DEFAULT_RTOL",
]

DEFAULT_RTOL = 1e-10
_ATOL_FLOOR = 1e-300  # keeps zero components from stalling pure-relative control


class IntegratorStall(RuntimeError):
    """Adaptive step size underflowed before reaching the target time."""

    def __init__(self, t_reached: float):
        super().__init__(f"integrator stall at t = {t_reached:.6g}")
        self.t_reached = t_reached


@dataclass(frozen=True)
class SymmetricState:
    """Energy-balanced pair (Z, Q) of one mode at time t."""
    z: complex
    q: complex
    t: float


@dataclass(frozen=True)
class EnergyRecord:
    """Pointwise energy functional value and squared symmetric amplitude."""
    t: float
    e: float
    zq_sq: float
    non_coercive: bool = False


@dataclass(frozen=True)
class GoodUnknown:
    """Combination -beta^2 i k theta - nu p omega, bounded when kappa = 0."""
    sigma: complex


def _weight(t: float, mode: Mode) -> float:
    # (p/k^2)^(1/4), the symmetrizing quarter power
    return (symbol_p(t, mode.k, mode.eta) / (mode.k * mode.k)) ** 0.25


def to_symmetric(state: ModeState, mode: Mode,
                 params: PhysicalParams) -> SymmetricState:
    """Map (omega, theta) to the symmetric pair (Z, Q)."""
    if mode.k == 0:
        raise ValueError("symmetrization undefined on zero mode")
    r = _weight(state.t, mode)
    return SymmetricState(
        z=state.omega / r,
        q=r * 1j * mode.k * params.beta * state.theta,
        t=state.t,
    )


def from_symmetric(state: SymmetricState, mode: Mode,
                   params: PhysicalParams) -> ModeState:
    """Exact inverse of `to_symmetric`."""
    if mode.k == 0:
        raise ValueError("symmetrization undefined on zero mode")
    r = _weight(state.t, mode)
    return ModeState(
        omega=state.z * r,
        theta=state.q / (r * 1j * mode.k * params.beta),
        t=state.t,
    )


def energy_functional(state: SymmetricState, mode: Mode,
                      params: PhysicalParams) -> EnergyRecord:
    """Pointwise energy E = (|Z|^2 + |Q|^2 + phi/(2 beta) Re(Z conj Q)) / 2.

    phi = (dp/dt) / (|k| p^(1/2)) lies in [-2, 2], so E is coercive for
    beta > 1/2:   (1 - 1/(2b))/2 * (|Z|^2+|Q|^2) <= E <= (1 + 1/(2b))/2 * (...).
    Below the threshold the record is flagged non-coercive (still computed).
    """
    if mode.k == 0:
        raise ValueError("energy functional undefined on zero mode")
    p = symbol_p(state.t, mode.k, mode.eta)
    phi = symbol_dtp(state.t, mode.k, mode.eta) / (abs(mode.k) * math.sqrt(p))
    zq = abs(state.z) ** 2 + abs(state.q) ** 2
    mixed = (state.z * state.q.conjugate()).real
    e = 0.5 * (zq + phi / (2.0 * params.beta) * mixed)
    return EnergyRecord(t=state.t, e=e, zq_sq=zq,
                        non_coercive=params.beta <= 0.5)


def good_unknown(state: ModeState, mode: Mode,
                 params: PhysicalParams) -> GoodUnknown:
    """Sigma = -beta^2 i k theta - nu p omega (zero-diffusivity regime)."""
    p = symbol_p(state.t, mode.k, mode.eta)
    b2 = params.beta * params.beta
    return GoodUnknown(sigma=-b2 * 1j * mode.k * state.theta
                       - params.nu * p * state.omega)


def _heat_decayed(state: ModeState, mode: Mode, params: PhysicalParams,
                  t1: float) -> ModeState:
    # k = 0: coupling terms vanish, leaving exact heat decay at rate eta^2
    dt = t1 - state.t
    e2 = mode.eta * mode.eta
    return ModeState(
        omega=state.omega * cmath.exp(-params.nu * e2 * dt),
        theta=state.theta * cmath.exp(-params.kappa * e2 * dt),
        t=t1,
    )


def _default_atol(*amplitudes: float) -> float:
    scale = max(amplitudes) if amplitudes else 0.0
    return max(1e-12 * scale, _ATOL_FLOOR)


_STIFF_STEP_LIMIT = 2e4


def _explicit_step_estimate(mode: Mode, params: PhysicalParams,
                            t0: float, t1: float) -> float:
    # stability-limited step count of an explicit pair ~ mu * int p / 2.8
    mu = max(params.nu, params.kappa)
    if mu == 0.0 or mode.k == 0:
        return 0.0
    k, eta = mode.k, mode.eta
    p_int = k * k * (t1 - t0) + ((eta - k * t0) ** 3
                                 - (eta - k * t1) ** 3) / (3.0 * k)
    return mu * p_int / 2.8


def _stiff_trajectory(state: ModeState, mode: Mode, params: PhysicalParams,
                      times, tol: float, atol: float) -> list[ModeState]:
    # dissipation-dominated modes: implicit integration is vastly cheaper
    from scipy.integrate import solve_ivp

    k, eta = float(mode.k), mode.eta
    b2 = params.beta ** 2
    nu, kappa = params.nu, params.kappa

    def rhs(t, y):
        om = y[0] + 1j * y[1]
        th = y[2] + 1j * y[3]
        p = k * k + (eta - k * t) ** 2
        f_om = -1j * b2 * k * th - nu * p * om
        f_th = -1j * (k / p) * om - kappa * p * th
        return [f_om.real, f_om.imag, f_th.real, f_th.imag]

    y0 = [state.omega.real, state.omega.imag,
          state.theta.real, state.theta.imag]
    sol = solve_ivp(rhs, (state.t, float(times[-1])), y0, t_eval=times,
                    method="LSODA", rtol=tol, atol=max(atol, 1e-14))
    if not sol.success:
        raise IntegratorStall(float(sol.t[-1]) if sol.t.size else state.t)
    return [ModeState(omega=sol.y[0, j] + 1j * sol.y[1, j],
                      theta=sol.y[2, j] + 1j * sol.y[3, j], t=t)
            for j, t in enumerate(times)]


def mode_trajectory(state: ModeState, mode: Mode, params: PhysicalParams,
                    times, tol: float = DEFAULT_RTOL,
                    atol: float | None = None) -> list[ModeState]:
    """Integrate one mode from state.t, sampling at each requested time."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a nonempty 1-d sequence")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    if times[0] < state.t:
        raise ValueError("times must not precede the state time")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    if mode.k == 0:
        return [_heat_decayed(state, mode, params, t) for t in times]
    if atol is None:
        atol = _default_atol(abs(state.omega), abs(state.theta))
    if _explicit_step_estimate(mode, params, state.t,
                               float(times[-1])) > _STIFF_STEP_LIMIT:
        return _stiff_trajectory(state, mode, params, times, tol, atol)
    out, status, t_reached = kernels.integrate_modes(
        np.array([state.omega]), np.array([state.theta]),
        np.array([float(mode.k)]), np.array([mode.eta]),
        params.beta, params.nu, params.kappa,
        state.t, times, tol, atol)
    if status != kernels.STATUS_OK:
        raise IntegratorStall(t_reached)
    return [ModeState(omega=out[j, 0, 0], theta=out[j, 1, 0], t=t)
            for j, t in enumerate(times)]


def evolve_mode(state: ModeState, mode: Mode, params: PhysicalParams,
                t1: float, tol: float = DEFAULT_RTOL,
                atol: float | None = None) -> ModeState:
    """Solve the per-mode linear system from state.t to t1 at tolerance tol."""
    if t1 < state.t:
        raise ValueError("t1 must be >= the state time")
    if t1 == state.t:
        return state
    return mode_trajectory(state, mode, params, [t1], tol, atol)[0]


def zq_squared(state: ModeState, mode: Mode, params: PhysicalParams) -> float:
    """|Z|^2 + |Q|^2 of a mode state."""
    s = to_symmetric(state, mode, params)
    return abs(s.z) ** 2 + abs(s.q) ** 2


def check_energy_envelope(trajectory, mode: Mode, params: PhysicalParams,
                          slack: float = 1e-6) -> CheckReport:
    """Verify the symmetric-amplitude envelope along a sampled trajectory.

    Inviscid: C^-2 * S(0) <= |Z(t)|^2 + |Q(t)|^2 <= C^2 * S(0) at every
    sample. Dissipative (requires the comparability condition): the upper
    envelope tightens to C^2 * exp(-rate k^2 (t^3 - t0^3) / 12) * S(0).
    `slack` is the relative allowance for integrator error. Trajectory
    entries may be SymmetricState or ModeState.
    """
    if params.beta <= 0.5:
        raise ValueError("envelope check requires beta > 1/2")
    states = [s if isinstance(s, SymmetricState)
              else to_symmetric(s, mode, params) for s in trajectory]
    if not states:
        raise ValueError("empty trajectory")
    cb2 = energy_envelope_constant(params.beta) ** 2
    s0 = abs(states[0].z) ** 2 + abs(states[0].q) ** 2
    vals = np.array([abs(s.z) ** 2 + abs(s.q) ** 2 for s in states])
    ts = np.array([s.t for s in states])

    if s0 == 0.0:
        peak = float(vals.max())
        return CheckReport("symmetric-amplitude envelope", peak == 0.0,
                           math.inf if peak == 0.0 else 0.0,
                           details="zero initial amplitude")

    if params.inviscid:
        upper = cb2 * s0 * np.ones_like(ts)
        name = "two-sided inviscid envelope"
    else:
        if not params.enhanced_ok:
            raise ValueError("dissipative envelope requires nu, kappa > 0 "
                             "with max/min < 4*beta - 1")
        rate = dissipation_rate(params)
        upper = cb2 * s0 * np.exp(-rate * mode.k ** 2
                                  * (ts ** 3 - ts[0] ** 3) / 12.0)
        name = "dissipative decay envelope"

    hi = vals / upper                      # must stay <= 1
    margin_hi = float(hi.max())
    if params.inviscid:
        lo = vals * cb2 / s0               # must stay >= 1
        margin_lo = float(lo.min())
    else:
        lo = None
        margin_lo = math.inf

    ok = margin_hi <= 1.0 + slack and margin_lo >= 1.0 - slack
    # worst relative margin: how far inside (positive) or outside (negative)
    margin = min(1.0 + slack - margin_hi, margin_lo - (1.0 - slack))
    if ok:
        detail = f"worst upper ratio {margin_hi:.9g}"
        if lo is not None:
            detail += f", worst lower ratio {margin_lo:.9g}"
        worst_t = float(ts[np.argmax(hi)])
    else:
        if margin_hi > 1.0 + slack:
            i = int(np.argmax(hi))
            detail = (f"upper bound violated at t={ts[i]:.6g}, "
                      f"k={mode.k}, eta={mode.eta:.6g}: ratio {hi[i]:.9g}")
        else:
            i = int(np.argmin(lo))
            detail = (f"lower bound violated at t={ts[i]:.6g}, "
                      f"k={mode.k}, eta={mode.eta:.6g}: ratio {lo[i]:.9g}")
        worst_t = float(ts[i])
    return CheckReport(name=name, passed=bool(ok), margin=float(margin),
                       worst_t=worst_t, details=detail)


def check_vorticity_decay(trajectory, mode: Mode, params: PhysicalParams,
                          c_margin: float) -> CheckReport:
    """Zero-diffusivity check: p(t) |omega(t)| <= c * (|Sigma(0)| + |k theta(0)|).

    Returns the smallest admissible constant observed along the trajectory as
    the report margin; passes when it does not exceed `c_margin`.
    """
    if not trajectory:
        raise ValueError("empty trajectory")
    first = trajectory[0]
    sig0 = abs(good_unknown(first, mode, params).sigma)
    denom = sig0 + abs(mode.k * first.theta)
    vals = np.array([symbol_p(s.t, mode.k, mode.eta) * abs(s.omega)
                     for s in trajectory])
    ts = np.array([s.t for s in trajectory])
    if denom == 0.0:
        peak = float(vals.max())
        return CheckReport("vorticity decay bound", peak == 0.0,
                           math.inf if peak == 0.0 else math.nan,
                           details="zero initial data")
    observed = vals / denom
    i = int(np.argmax(observed))
    worst = float(observed[i])
    return CheckReport(
        name="vorticity decay bound",
        passed=bool(worst <= c_margin),
        margin=worst,
        worst_t=float(ts[i]),
        details=f"smallest admissible constant {worst:.6g} "
                f"(allowed {c_margin:.6g})",
    )


def _norm_entries(om, th, kg, eg, t, deta):
    # row 0 is the k = 0 column in FFT layout; _neq quantities drop it
    u = eg - kg * t
    p = kg * kg + u * u
    p[0, 0] = 1.0  # (0,0) carries no velocity; guard the division
    om2 = np.abs(om) ** 2
    th2 = np.abs(th) ** 2
    return {
        "omega_neq": math.sqrt(deta * float(om2[1:].sum())),
        "theta_neq": math.sqrt(deta * float(th2[1:].sum())),
        "grad_theta_neq": math.sqrt(deta * float((p * th2)[1:].sum())),
        "u_x_neq": math.sqrt(deta * float(((u * u / (p * p)) * om2)[1:].sum())),
        "u_y": math.sqrt(deta * float(((kg * kg / (p * p)) * om2).sum())),
    }


FIELD_NORM_LABELS = ("theta_neq", "u_x_neq", "u_y", "omega_neq",
                     "grad_theta_neq")


def evolve_field_linear(field: SpectralField, params: PhysicalParams, times,
                        tol: float = DEFAULT_RTOL, atol: float | None = None,
                        keep_fields: bool = True):
    """Evolve every lattice mode independently from t = 0; record norms.

    Returns (fields, norms) where fields is a list of SpectralField at the
    requested times (None when keep_fields is False) and norms maps the
    labels in FIELD_NORM_LABELS to NormSeries (static-frame L^2 quantities,
    k = 0 column excluded from the _neq entries).

    Only k >= 0 columns are integrated; the conjugate half follows from the
    Hermitian symmetry of real fields, which the per-mode flow preserves.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a nonempty 1-d sequence")
    if times[0] < 0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be increasing and start at t >= 0")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    nk, neta = field.nk, field.neta
    deta = field.eta_spacing

    rows = np.arange(1, nk // 2 + 1)       # stored +k rows (incl. Nyquist)
    fill = np.arange(nk // 2 + 1, nk)      # rows reconstructed by conjugation
    colflip = (-np.arange(neta)) % neta

    om0 = field.omega[rows].ravel()
    th0 = field.theta[rows].ravel()
    kbatch = np.repeat(field.k[rows].astype(float), neta)
    ebatch = np.tile(field.eta, rows.size)
    if atol is None:
        atol = _default_atol(float(np.abs(field.omega).max()),
                             float(np.abs(field.theta).max()))

    if rows.size:
        out, status, t_reached = kernels.integrate_modes(
            om0, th0, kbatch, ebatch, params.beta, params.nu, params.kappa,
            0.0, times, tol, atol)
        if status != kernels.STATUS_OK:
            raise IntegratorStall(t_reached)

    kg = field.k[:, None].astype(float)
    eg = field.eta[None, :] * np.ones((nk, 1))
    eta2 = field.eta ** 2
    fields_out = [] if keep_fields else None
    series: dict[str, list[float]] = {lab: [] for lab in FIELD_NORM_LABELS}
    for j, t in enumerate(times):
        om = np.empty((nk, neta), complex)
        th = np.empty((nk, neta), complex)
        if rows.size:
            om[rows] = out[j, 0].reshape(rows.size, neta)
            th[rows] = out[j, 1].reshape(rows.size, neta)
        om[0] = field.omega[0] * np.exp(-params.nu * eta2 * t)
        th[0] = field.theta[0] * np.exp(-params.kappa * eta2 * t)
        if fill.size:
            src = nk - fill
            om[fill] = np.conj(om[src][:, colflip])
            th[fill] = np.conj(th[src][:, colflip])
        for lab, val in _norm_entries(om, th, kg, eg, t, deta).items():
            series[lab].append(val)
        if keep_fields:
            fields_out.append(SpectralField(om, th, deta))
    norms = {lab: NormSeries(lab, times, np.array(vals))
             for lab, vals in series.items()}
    return fields_out, norms
