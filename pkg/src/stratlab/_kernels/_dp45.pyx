# cython: language_level=3
"""Compiled per-mode Dormand-Prince 5(4) kernel.

Same tableau and step controller as the numpy fallback (`pyref`), but each
mode is integrated with its own adaptive step sequence, which is what makes
whole-lattice linear evolutions cheap: a mode needs small steps only near its
critical time eta/k, so per-mode adaptivity wins a large factor over any
shared-step scheme.
"""
import numpy as np

cimport cython
from libc.math cimport fabs, fmax, fmin, pow, sqrt

cdef double complex I = 1j

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 5.0

# Dormand-Prince 5(4) coefficients
cdef double C2 = 1.0/5.0, C3 = 3.0/10.0, C4 = 4.0/5.0, C5 = 8.0/9.0
cdef double A21 = 1.0/5.0
cdef double A31 = 3.0/40.0, A32 = 9.0/40.0
cdef double A41 = 44.0/45.0, A42 = -56.0/15.0, A43 = 32.0/9.0
cdef double A51 = 19372.0/6561.0, A52 = -25360.0/2187.0
cdef double A53 = 64448.0/6561.0, A54 = -212.0/729.0
cdef double A61 = 9017.0/3168.0, A62 = -355.0/33.0, A63 = 46732.0/5247.0
cdef double A64 = 49.0/176.0, A65 = -5103.0/18656.0
cdef double B1 = 35.0/384.0, B3 = 500.0/1113.0, B4 = 125.0/192.0
cdef double B5 = -2187.0/6784.0, B6 = 11.0/84.0
cdef double E1 = 71.0/57600.0, E3 = -71.0/16695.0, E4 = 71.0/1920.0
cdef double E5 = -17253.0/339200.0, E6 = 22.0/525.0, E7 = -1.0/40.0

STATUS_OK = 0
STATUS_STALL = 1


@cython.cdivision(True)
cdef inline void _rhs(double t, double complex om, double complex th,
                      double k, double eta, double beta2,
                      double nu, double kappa,
                      double complex *f_om, double complex *f_th) noexcept nogil:
    cdef double u = eta - k * t
    cdef double p = k * k + u * u
    f_om[0] = -I * beta2 * k * th - nu * p * om
    f_th[0] = -I * (k / p) * om - kappa * p * th


@cython.boundscheck(False)
@cython.wraparound(False)
@cython.cdivision(True)
cdef int _integrate_one(double complex om0, double complex th0,
                        double k, double eta, double beta2,
                        double nu, double kappa, double t0,
                        double[::1] times, double rtol, double atol,
                        double complex[:, ::1] out,
                        double *t_reached) noexcept nogil:
    cdef Py_ssize_t nt = times.shape[0]
    cdef Py_ssize_t j
    cdef double complex om = om0, th = th0
    cdef double complex f_om, f_th
    cdef double complex k1o, k2o, k3o, k4o, k5o, k6o, k7o
    cdef double complex k1t, k2t, k3t, k4t, k5t, k6t, k7t
    cdef double complex om5, th5, e_om, e_th
    cdef double t = t0, te, h, hs, err, fac, d0, d1, sc_om, sc_th
    cdef bint capped

    t_reached[0] = t
    if om == 0 and th == 0:
        for j in range(nt):
            out[j, 0] = 0
            out[j, 1] = 0
        t_reached[0] = times[nt - 1] if nt > 0 else t
        return 0

    _rhs(t, om, th, k, eta, beta2, nu, kappa, &k1o, &k1t)
    # one common scale; per-component scales misbehave on zero components
    sc_om = atol + rtol * fmax(abs(om), abs(th))
    sc_th = sc_om
    d0 = sqrt(0.5 * ((abs(om) / sc_om) ** 2 + (abs(th) / sc_th) ** 2))
    d1 = sqrt(0.5 * ((abs(k1o) / sc_om) ** 2 + (abs(k1t) / sc_th) ** 2))
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6
    else:
        h = 0.01 * d0 / d1
    if nt > 0:
        h = fmin(h, fmax(times[nt - 1] - t0, 1e-12))

    for j in range(nt):
        te = times[j]
        while te - t > 1e-13 * fmax(1.0, fabs(te)):
            capped = h > te - t
            hs = fmin(h, te - t)
            if hs < 1e-14 * fmax(1.0, fabs(t)):
                t_reached[0] = t
                return 1
            _rhs(t + C2 * hs, om + hs * (A21 * k1o),
                 th + hs * (A21 * k1t), k, eta, beta2, nu, kappa, &k2o, &k2t)
            _rhs(t + C3 * hs, om + hs * (A31 * k1o + A32 * k2o),
                 th + hs * (A31 * k1t + A32 * k2t),
                 k, eta, beta2, nu, kappa, &k3o, &k3t)
            _rhs(t + C4 * hs, om + hs * (A41 * k1o + A42 * k2o + A43 * k3o),
                 th + hs * (A41 * k1t + A42 * k2t + A43 * k3t),
                 k, eta, beta2, nu, kappa, &k4o, &k4t)
            _rhs(t + C5 * hs,
                 om + hs * (A51 * k1o + A52 * k2o + A53 * k3o + A54 * k4o),
                 th + hs * (A51 * k1t + A52 * k2t + A53 * k3t + A54 * k4t),
                 k, eta, beta2, nu, kappa, &k5o, &k5t)
            _rhs(t + hs,
                 om + hs * (A61 * k1o + A62 * k2o + A63 * k3o + A64 * k4o
                            + A65 * k5o),
                 th + hs * (A61 * k1t + A62 * k2t + A63 * k3t + A64 * k4t
                            + A65 * k5t),
                 k, eta, beta2, nu, kappa, &k6o, &k6t)
            om5 = om + hs * (B1 * k1o + B3 * k3o + B4 * k4o + B5 * k5o
                             + B6 * k6o)
            th5 = th + hs * (B1 * k1t + B3 * k3t + B4 * k4t + B5 * k5t
                             + B6 * k6t)
            _rhs(t + hs, om5, th5, k, eta, beta2, nu, kappa, &k7o, &k7t)
            e_om = hs * (E1 * k1o + E3 * k3o + E4 * k4o + E5 * k5o
                         + E6 * k6o + E7 * k7o)
            e_th = hs * (E1 * k1t + E3 * k3t + E4 * k4t + E5 * k5t
                         + E6 * k6t + E7 * k7t)
            sc_om = atol + rtol * fmax(abs(om), abs(om5))
            sc_th = atol + rtol * fmax(abs(th), abs(th5))
            err = sqrt(0.5 * ((abs(e_om) / sc_om) ** 2
                              + (abs(e_th) / sc_th) ** 2))
            if err <= 1.0:
                t = t + hs
                om = om5
                th = th5
                k1o = k7o  # FSAL
                k1t = k7t
                if err == 0.0:
                    fac = MAX_FACTOR
                else:
                    fac = fmin(MAX_FACTOR,
                               fmax(MIN_FACTOR, SAFETY * pow(err, -0.2)))
                if capped:
                    h = fmax(h, hs * fac)
                else:
                    h = hs * fac
            else:
                h = hs * fmax(MIN_FACTOR, SAFETY * pow(err, -0.2))
        out[j, 0] = om
        out[j, 1] = th
    t_reached[0] = t
    return 0


@cython.boundscheck(False)
@cython.wraparound(False)
def integrate_modes(om0, th0, kk, eta, double beta, double nu, double kappa,
                    double t0, times, double rtol, double atol):
    """Batch driver: per-mode adaptive integration, sampled at `times`.

    Returns (out, status, t_reached); out has shape (len(times), 2, n).
    """
    cdef double complex[::1] om_v = np.ascontiguousarray(om0, dtype=complex)
    cdef double complex[::1] th_v = np.ascontiguousarray(th0, dtype=complex)
    cdef double[::1] k_v = np.ascontiguousarray(kk, dtype=float)
    cdef double[::1] eta_v = np.ascontiguousarray(eta, dtype=float)
    cdef double[::1] t_v = np.ascontiguousarray(times, dtype=float)
    cdef Py_ssize_t n = om_v.shape[0]
    cdef Py_ssize_t nt = t_v.shape[0]
    out_arr = np.empty((n, nt, 2), dtype=complex)
    cdef double complex[:, :, ::1] out = out_arr
    cdef double beta2 = beta * beta
    cdef double t_reached = t0, t_bad = 0.0
    cdef int status = 0, rc
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            rc = _integrate_one(om_v[i], th_v[i], k_v[i], eta_v[i], beta2,
                                nu, kappa, t0, t_v, rtol, atol,
                                out[i], &t_reached)
            if rc != 0 and status == 0:
                status = 1
                t_bad = t_reached
    return out_arr.transpose(1, 2, 0), status, (t_bad if status else t_reached)
