"""Rate fitting and envelope verification for norm time series.

Turns the scalar diagnostics emitted by the solvers into quantitative
evidence: log-log power-law fits for decay/growth exponents, one-sided
envelope checks, and the t^(1/2) lower-bound check for the shear-buoyancy
growth of vorticity and density gradient.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import PhysicalParams, energy_envelope_constant

__all__ = [
    "ScalarSeries", "NormSeries", "RateFit", "CheckReport",
    "fit_power_law", "check_envelope", "check_instability_lower_bound",
]


@dataclass(frozen=True)
class ScalarSeries:
    """Time-stamped scalar diagnostic (finite, strictly increasing times)."""

    label: str
    t: np.ndarray
    value: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.value, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValueError("t and value must be 1-d arrays of equal length")
        if t.size and not np.all(np.diff(t) > 0):
            raise ValueError("sample times must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "value", v)

    def window(self, t_lo: float, t_hi: float):
        m = (self.t >= t_lo) & (self.t <= t_hi)
        return type(self)(self.label, self.t[m], self.value[m])


@dataclass(frozen=True)
class NormSeries(ScalarSeries):
    """ScalarSeries restricted to nonnegative values (a norm in time)."""

    def __post_init__(self):
        super().__post_init__()
        if np.any(self.value < 0):
            raise ValueError("norm values must be nonnegative")


@dataclass(frozen=True)
class RateFit:
    exponent: float
    stderr: float
    window: tuple[float, float]
    n_samples: int


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one quantitative bound check."""

    name: str
    passed: bool
    margin: float
    worst_t: float | None = None
    details: str = ""


def fit_power_law(series: ScalarSeries, t_lo: float, t_hi: float) -> RateFit:
    """Least-squares slope of log(value) against log(t) on [t_lo, t_hi].

    The slope is the fitted power-law exponent (value ~ t^exponent); stderr
    is the standard error of the slope estimated from the fit residuals.
    """
    if not t_lo < t_hi:
        raise ValueError("fit window must satisfy t_lo < t_hi")
    if t_lo <= 0:
        raise ValueError("fit window must have t_lo > 0 (log scale)")
    win = series.window(t_lo, t_hi)
    n = win.t.size
    if n < 8:
        raise ValueError(f"fit window holds {n} samples; need at least 8")
    if np.any(win.value <= 0):
        raise ValueError("log of nonpositive value in fit window")
    x = np.log(win.t)
    y = np.log(win.value)
    xm = x - x.mean()
    sxx = float(xm @ xm)
    slope = float(xm @ y) / sxx
    resid = y - (y.mean() + slope * xm)
    var = float(resid @ resid) / (n - 2) / sxx if n > 2 else 0.0
    return RateFit(exponent=slope, stderr=math.sqrt(max(var, 0.0)),
                   window=(t_lo, t_hi), n_samples=n)


def _ratios(value, env):
    # value/env with 0/0 counted as exactly on the envelope
    out = np.empty_like(value)
    pos = env > 0
    out[pos] = value[pos] / env[pos]
    out[~pos] = np.where(value[~pos] > 0, np.inf, 1.0)
    return out


def check_envelope(series: ScalarSeries, envelope, mode: str,
                   slack: float = 0.0) -> CheckReport:
    """Verify value <= envelope(t) ("upper") or >= ("lower") at every sample.

    `slack` is a relative allowance on the envelope; the report's margin is
    the worst observed value/envelope ratio.
    """
    if mode not in ("upper", "lower"):
        raise ValueError("mode must be 'upper' or 'lower'")
    env = np.asarray([float(envelope(t)) for t in series.t])
    if not np.all(np.isfinite(env)):
        raise ValueError("envelope must be finite at all sample times")
    r = _ratios(series.value, env)
    if mode == "upper":
        i = int(np.argmax(r)) if r.size else 0
        worst = float(r[i]) if r.size else 1.0
        passed = worst <= 1.0 + slack
    else:
        i = int(np.argmin(r)) if r.size else 0
        worst = float(r[i]) if r.size else 1.0
        passed = worst >= 1.0 - slack
    return CheckReport(
        name=f"{series.label} {mode} envelope",
        passed=bool(passed),
        margin=worst,
        worst_t=float(series.t[i]) if r.size else None,
        details=f"worst value/envelope ratio {worst:.6g}",
    )


def check_instability_lower_bound(omega_series: NormSeries,
                                  gradtheta_series: NormSeries,
                                  initial_lowfreq: float,
                                  params: PhysicalParams) -> CheckReport:
    """Check the t^(1/2) growth floor of vorticity plus density gradient.

    Requires (|omega| + |grad theta|)(t) >= c * C^-1 * <t>^(1/2) * data for a
    fitted constant c > 0, where <t> = (1+t^2)^(1/2), C is the two-sided
    energy envelope constant and `data` the caller-computed low-frequency
    size of the initial condition. The fitted c is reported as the margin.
    """
    if omega_series.t.shape != gradtheta_series.t.shape or \
            not np.allclose(omega_series.t, gradtheta_series.t, rtol=0, atol=1e-12):
        raise ValueError("series must share one time grid")
    if initial_lowfreq <= 0:
        raise ValueError("initial_lowfreq must be > 0")
    cb = energy_envelope_constant(params.beta)
    combined = omega_series.value + gradtheta_series.value
    # <t>^(1/2) with <t> = (1+t^2)^(1/2)
    floor = (1.0 + omega_series.t ** 2) ** 0.25 * initial_lowfreq / cb
    r = _ratios(combined, floor)
    i = int(np.argmin(r))
    c = float(r[i])
    return CheckReport(
        name="shear-buoyancy growth lower bound",
        passed=bool(np.isfinite(c) and c > 0),
        margin=c,
        worst_t=float(omega_series.t[i]),
        details=f"fitted constant c = {c:.6g}",
    )
