"""Numpy fallback for the per-mode integration kernel.

Integrates batches of independent moving-frame modes

    d/dt omega = -i beta^2 k theta - nu p omega
    d/dt theta = -i k / p omega    - kappa p theta,   p = k^2 + (eta - k t)^2

with an embedded Dormand-Prince 5(4) pair. All modes in a batch share one
adaptive step sequence; the controller uses the worst per-mode scaled error,
so every mode is resolved at least to the requested tolerance. The compiled
backend (`_dp45`) implements the same tableau with per-mode steps.
"""
from __future__ import annotations

import numpy as np

STATUS_OK = 0
STATUS_STALL = 1

# Dormand-Prince 5(4) tableau (FSAL)
_C = (0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0)
_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0,
     -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
     11.0 / 84.0),
)
_B = _A[6]  # 5th-order solution weights (FSAL row)
_E = (71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0,
      -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


def _rhs(t, om, th, k, eta, beta2, nu, kappa):
    p = k * k + (eta - k * t) ** 2
    f_om = (-1j * beta2) * (k * th) - nu * (p * om)
    f_th = (-1j) * (k / p) * om - kappa * (p * th)
    return f_om, f_th


def _err_norm(e_om, e_th, sc_om, sc_th):
    r = 0.5 * ((np.abs(e_om) / sc_om) ** 2 + (np.abs(e_th) / sc_th) ** 2)
    return float(np.sqrt(r.max()))


def _initial_step(t0, om, th, f_om, f_th, rtol, atol, span):
    # one common scale; per-component scales misbehave on zero components
    sc = atol + rtol * max(np.abs(om).max(), np.abs(th).max())
    d0 = _err_norm(om, th, sc, sc)
    d1 = _err_norm(f_om, f_th, sc, sc)
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6
    else:
        h = 0.01 * d0 / d1
    return min(h, span)


def integrate_modes(om0, th0, k, eta, beta, nu, kappa, t0, times, rtol, atol):
    """Advance all modes from t0, sampling the state at each requested time.

    Returns (out, status, t_reached) with out of shape (len(times), 2, n);
    out[j, 0] is omega and out[j, 1] theta at times[j]. k entries must be
    nonzero (the k = 0 column has an exact closed form handled upstream).
    """
    om = np.asarray(om0, dtype=complex).copy()
    th = np.asarray(th0, dtype=complex).copy()
    k = np.asarray(k, dtype=float)
    eta = np.asarray(eta, dtype=float)
    times = np.asarray(times, dtype=float)
    nt, n = times.shape[0], om.shape[0]
    out = np.empty((nt, 2, n), dtype=complex)
    beta2 = beta * beta

    t = float(t0)
    span = max(times[-1] - t0, 0.0) if nt else 0.0
    if span == 0.0 and nt:
        out[:, 0, :] = om
        out[:, 1, :] = th
        return out, STATUS_OK, t

    f_om, f_th = _rhs(t, om, th, k, eta, beta2, nu, kappa)
    if not (np.abs(om).max() > 0 or np.abs(th).max() > 0):
        out[:, 0, :] = 0.0
        out[:, 1, :] = 0.0
        return out, STATUS_OK, times[-1]
    h = _initial_step(t, om, th, f_om, f_th, rtol, atol, span)

    k_om = [f_om] + [None] * 6
    k_th = [f_th] + [None] * 6
    for j in range(nt):
        te = float(times[j])
        while te - t > 1e-13 * max(1.0, abs(te)):
            capped = h > te - t
            hs = min(h, te - t)
            if hs < 1e-14 * max(1.0, abs(t)):
                return out, STATUS_STALL, t
            # stages 2..6 then the FSAL stage 7 at t+hs
            for s in range(1, 7):
                a = _A[s]
                dom = a[0] * k_om[0]
                dth = a[0] * k_th[0]
                for m in range(1, s):
                    if a[m] != 0.0:
                        dom = dom + a[m] * k_om[m]
                        dth = dth + a[m] * k_th[m]
                k_om[s], k_th[s] = _rhs(t + _C[s] * hs, om + hs * dom,
                                        th + hs * dth, k, eta, beta2, nu, kappa)
            om5 = om + hs * (_B[0] * k_om[0] + _B[2] * k_om[2] + _B[3] * k_om[3]
                             + _B[4] * k_om[4] + _B[5] * k_om[5])
            th5 = th + hs * (_B[0] * k_th[0] + _B[2] * k_th[2] + _B[3] * k_th[3]
                             + _B[4] * k_th[4] + _B[5] * k_th[5])
            k_om[6], k_th[6] = _rhs(t + hs, om5, th5, k, eta, beta2, nu, kappa)
            e_om = hs * (_E[0] * k_om[0] + _E[2] * k_om[2] + _E[3] * k_om[3]
                         + _E[4] * k_om[4] + _E[5] * k_om[5] + _E[6] * k_om[6])
            e_th = hs * (_E[0] * k_th[0] + _E[2] * k_th[2] + _E[3] * k_th[3]
                         + _E[4] * k_th[4] + _E[5] * k_th[5] + _E[6] * k_th[6])
            sc_om = atol + rtol * np.maximum(np.abs(om), np.abs(om5))
            sc_th = atol + rtol * np.maximum(np.abs(th), np.abs(th5))
            err = _err_norm(e_om, e_th, sc_om, sc_th)

            if err <= 1.0:
                t = t + hs
                om, th = om5, th5
                k_om[0], k_th[0] = k_om[6], k_th[6]  # FSAL
                fac = _MAX_FACTOR if err == 0.0 else min(
                    _MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err ** -0.2))
                # a step capped at an output time must not shrink the proposal
                h = max(h, hs * fac) if capped else hs * fac
            else:
                h = hs * max(_MIN_FACTOR, _SAFETY * err ** -0.2)
        out[j, 0, :] = om
        out[j, 1, :] = th
    return out, STATUS_OK, t
