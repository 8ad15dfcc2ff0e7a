"""Two-mode resonance cascade model.

Near the critical time eta/k the interaction of neighbouring horizontal
wavenumbers is captured by the coupled system

    dZ_k/dt     = (k^2/eta)^(1/2) * eps sqrt(1+t) / (1+(t-eta/k)^2)^(1/4) * Z_{k-1}
    dZ_{k-1}/dt = (eta/k^2)^(1/2) * eps sqrt(1+t) / (1+(t-eta/k)^2)^(3/4) * Z_k

on the resonant window |t - eta/k| <= eta/k^2. Integrated across the window
the pair is amplified by at most an algebraic factor (eta/k^2)^c, and a full
cascade through the critical times eta/K, eta/(K-1), ..., eta (with
K ~ sqrt(eta)) compounds to (eta^K/(K!)^2)^c ~ exp(2 c sqrt(eta)) by
Stirling: the frequency-space signature of Gevrey-2 regularity loss.

The exponent c carries information only on the time scale t ~ eps^-2, where
eps^2 * eta/k is order one: in the deep-perturbative limit the window gain
degenerates to 1. The sweep in `fit_amplification_exponent` therefore pins
eps^2 * eta/k at its configured ceiling when choosing k for each ratio.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

__all__ = [
    "ToyParams", "ToyTrajectory", "CascadeReport", "CriticalInterval",
    "evolve_toy", "amplification", "amplification_sweep",
    "fit_exponent_from_gains", "fit_amplification_exponent",
    "cascade_gain", "critical_time_partition",
]


@dataclass(frozen=True)
class ToyParams:
    """Inputs of one resonant-window integration (unit data by default)."""

    eps: float
    eta: float
    k: int
    z_k0: complex = 1.0 + 0j
    z_km10: complex = 1.0 + 0j

    def __post_init__(self):
        if not self.eps >= 0:
            raise ValueError("eps must be >= 0")
        if not self.eta > 0:
            raise ValueError("eta must be > 0")
        if self.k < 1:
            raise ValueError("k must be a positive integer")

    @property
    def ratio(self) -> float:
        return self.eta / self.k ** 2

    @property
    def window(self) -> tuple[float, float]:
        tc = self.eta / self.k
        return tc - self.ratio, tc + self.ratio


@dataclass(frozen=True)
class ToyTrajectory:
    t: np.ndarray
    z_k: np.ndarray
    z_km1: np.ndarray


def evolve_toy(p: ToyParams, tol: float = 1e-10,
               n_samples: int = 800) -> ToyTrajectory:
    """Integrate the pair over the resonant window with adaptive control."""
    if p.ratio < 4.0:
        raise ValueError("resonant window requires eta/k^2 >= 4")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    tc = p.eta / p.k
    t0, t1 = p.window
    r_up = math.sqrt(p.k ** 2 / p.eta)
    r_dn = math.sqrt(p.eta / p.k ** 2)

    def rhs(t, y):
        zk = y[0] + 1j * y[1]
        zm = y[2] + 1j * y[3]
        w = p.eps * math.sqrt(1.0 + t)
        d = 1.0 + (t - tc) ** 2
        dzk = r_up * w * d ** -0.25 * zm
        dzm = r_dn * w * d ** -0.75 * zk
        return [dzk.real, dzk.imag, dzm.real, dzm.imag]

    y0 = [p.z_k0.real, p.z_k0.imag, p.z_km10.real, p.z_km10.imag]
    t_eval = np.linspace(t0, t1, n_samples)
    sol = solve_ivp(rhs, (t0, t1), y0, t_eval=t_eval, rtol=tol,
                    atol=tol * max(1.0, abs(p.z_k0), abs(p.z_km10)),
                    method="RK45")
    if not sol.success:
        raise RuntimeError(f"integrator stall at t = {sol.t[-1]:.6g}")
    return ToyTrajectory(
        t=sol.t,
        z_k=sol.y[0] + 1j * sol.y[1],
        z_km1=sol.y[2] + 1j * sol.y[3],
    )


def amplification(traj: ToyTrajectory, initial: float) -> float:
    """Peak of (|Z_k| + |Z_{k-1}|)/initial along the trajectory."""
    if initial <= 0:
        raise ValueError("initial size must be > 0")
    return float((np.abs(traj.z_k) + np.abs(traj.z_km1)).max() / initial)


def amplification_sweep(ratios, eps: float, delta: float = 1.0,
                        tol: float = 1e-10):
    """Window gains for each eta/k^2 ratio at fixed eps.

    For each ratio r the wavenumber is k = floor(delta/(eps^2 r)), which
    saturates the perturbative time-scale budget eps^2 * eta/k <= delta (the
    critical time is t ~ eta/k); eta = r k^2. Raises when the budget cannot
    be met even at k = 1.
    """
    out = []
    for r in ratios:
        k = math.floor(delta / (eps * eps * r))
        if k < 1:
            raise ValueError(
                "outside perturbative time-scale: eps^2 * eta/k = "
                f"{eps * eps * r:.3g} > delta = {delta:.3g} at k = 1")
        p = ToyParams(eps=eps, eta=r * k * k, k=k)
        traj = evolve_toy(p, tol=tol)
        gain = amplification(traj, abs(p.z_k0) + abs(p.z_km10))
        out.append((float(r), k, p.eta, gain))
    return out


def fit_exponent_from_gains(ratios, gains) -> float:
    """Least-squares slope of log(gain) against log(ratio)."""
    if len(ratios) < 2 or len(ratios) != len(gains):
        raise ValueError("need matched ratio/gain sequences of length >= 2")
    return float(np.polyfit(np.log(ratios), np.log(gains), 1)[0])


def fit_amplification_exponent(ratios, eps: float, delta: float = 1.0,
                               tol: float = 1e-10) -> float:
    """Slope c of log(window gain) against log(eta/k^2) over the sweep.

    The cascade arithmetic requires 1 < c < 4; a fit outside that range
    aborts rather than returning a meaningless exponent.
    """
    ratios = list(ratios)
    if len(ratios) < 2:
        raise ValueError("sweep needs at least two ratios")
    rows = amplification_sweep(ratios, eps, delta, tol)
    c = fit_exponent_from_gains([r[0] for r in rows], [r[3] for r in rows])
    if not 1.0 < c < 4.0:
        raise RuntimeError(
            f"amplification exponent c = {c:.4g} outside (1, 4); "
            "sweep is outside the cascade regime")
    return c


@dataclass(frozen=True)
class CascadeReport:
    """Compounded gain of a full cascade, all products done in log space."""

    per_step_gains: np.ndarray      # (eta/k^2)^c for k = K..1
    total_gain: float               # exp of log_total_gain (inf on overflow)
    fitted_c: float
    log_total_gain: float
    stirling_log: float             # 2 c sqrt(eta) - (c/2) log(eta)
    note: str = ""


def cascade_gain(eta: float, c: float) -> CascadeReport:
    """Compound the per-window gains (eta/k^2)^c down the cascade.

    Steps run k = floor(sqrt(eta)), ..., 1 (the range on which the window
    picture applies); the total (eta^K/(K!)^2)^c is compared against its
    Stirling form exp(2 c sqrt(eta))/eta^(c/2). The envelope is a growth in
    eta; reported in logs because the totals overflow quickly.
    """
    if eta < 1.0:
        raise ValueError("eta must be >= 1")
    if not 1.0 < c < 4.0:
        raise ValueError("c must lie in (1, 4)")
    kmax = int(math.floor(math.sqrt(eta)))
    ks = np.arange(kmax, 0, -1)
    log_steps = c * (math.log(eta) - 2.0 * np.log(ks))
    log_total = float(log_steps.sum())
    # same thing in closed form: c (K log eta - 2 log K!)
    assert abs(log_total - c * (kmax * math.log(eta)
                                - 2.0 * math.lgamma(kmax + 1))) < 1e-9 * (1 + abs(log_total))
    stirling = 2.0 * c * math.sqrt(eta) - 0.5 * c * math.log(eta)
    total = math.exp(log_total) if log_total < 709.0 else math.inf
    return CascadeReport(
        per_step_gains=np.exp(log_steps),
        total_gain=total,
        fitted_c=c,
        log_total_gain=log_total,
        stirling_log=stirling,
        note="total grows like exp(2 c sqrt(eta)) (Gevrey-2 scale loss)",
    )


@dataclass(frozen=True)
class CriticalInterval:
    """Tile [eta/(k+1), eta/k] with its resonant sub-window marked."""

    k: int
    t_lo: float
    t_hi: float
    resonant_lo: float
    resonant_hi: float


def critical_time_partition(eta: float, k_max: int) -> list[CriticalInterval]:
    """Non-overlapping tiles [eta/(k+1), eta/k] for k = k_max..1.

    The tiles cover [eta/(k_max+1), eta]; within each, the resonant window
    |t - eta/k| <= eta/k^2 is clipped to the tile.
    """
    if eta <= 0:
        raise ValueError("eta must be > 0")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    out = []
    for k in range(k_max, 0, -1):
        t_lo = eta / (k + 1)
        t_hi = eta / k
        half = eta / k ** 2
        out.append(CriticalInterval(
            k=k, t_lo=t_lo, t_hi=t_hi,
            resonant_lo=max(t_lo, t_hi - half),
            resonant_hi=t_hi,  # window center eta/k is the tile's right edge
        ))
    return out
