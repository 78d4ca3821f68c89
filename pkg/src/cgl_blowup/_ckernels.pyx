# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contracts as cgl_blowup._pykernels."""

import numpy as np
cimport numpy as cnp
from libc.math cimport pow, log, sqrt, fabs

cnp.import_array()


def nonlinear_power(const double complex[::1] u, double alpha, out=None):
    cdef Py_ssize_t i, m = u.shape[0]
    if out is None:
        out = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef double re, im, a2, f
    cdef double half = 0.5 * alpha
    if alpha == 2.0:
        for i in range(m):
            re = u[i].real
            im = u[i].imag
            a2 = re * re + im * im
            o[i] = a2 * u[i]
    elif alpha == 1.0:
        for i in range(m):
            re = u[i].real
            im = u[i].imag
            o[i] = sqrt(re * re + im * im) * u[i]
    else:
        for i in range(m):
            re = u[i].real
            im = u[i].imag
            a2 = re * re + im * im
            f = pow(a2, half) if a2 > 0 else 0.0
            o[i] = f * u[i]
    return out


def power_sum(const double complex[::1] u, double p):
    cdef Py_ssize_t i, m = u.shape[0]
    cdef double s = 0.0, re, im, a2
    cdef double half = 0.5 * p
    if p == 2.0:
        for i in range(m):
            re = u[i].real
            im = u[i].imag
            s += re * re + im * im
    elif p == 4.0:
        for i in range(m):
            re = u[i].real
            im = u[i].imag
            a2 = re * re + im * im
            s += a2 * a2
    elif p == 3.0:
        for i in range(m):
            re = u[i].real
            im = u[i].imag
            a2 = re * re + im * im
            s += a2 * sqrt(a2)
    else:
        for i in range(m):
            re = u[i].real
            im = u[i].imag
            a2 = re * re + im * im
            if a2 > 0:
                s += pow(a2, half)
    return s


cdef inline double _log_ratio(double s, double g, double q, double dv,
                              double eg, double es):
    return log(dv * q) - eg * log(dv * g) - es * log(dv * s)


def gn_sweep(double[::1] w, double[::1] kw, const double[::1] k1, int n, int dim,
             double alpha, double delta, double s2, double g2, double pp, double dv):
    cdef double p = alpha + 2.0
    cdef double eg = dim * alpha / 4.0
    cdef double es = (4.0 - (dim - 2) * alpha) / 4.0
    cdef double kdiag = dim * k1[0]
    cdef Py_ssize_t total = 1
    cdef int a
    for a in range(dim):
        total *= n
    cdef Py_ssize_t strides[3]
    for a in range(dim):
        strides[a] = 1
        for _ in range(dim - 1 - a):
            strides[a] *= n
    cdef double best = _log_ratio(s2, g2, pp, dv, eg, es)
    cdef Py_ssize_t j, rem, c, base, mm
    cdef double wj, kwj, pj, d, s_new, g_new, p_new, r
    cdef double bd, bs, bg, bp
    cdef int found, sgn
    cdef long accepted = 0
    for j in range(total):
        wj = w[j]
        kwj = kw[j]
        pj = pow(fabs(wj), p)
        found = 0
        for sgn in range(2):
            d = delta if sgn == 0 else -delta
            s_new = s2 + 2.0 * wj * d + d * d
            g_new = g2 + 2.0 * d * kwj + d * d * kdiag
            p_new = pp - pj + pow(fabs(wj + d), p)
            if s_new <= 0 or g_new <= 0 or p_new <= 0:
                continue
            r = _log_ratio(s_new, g_new, p_new, dv, eg, es)
            if r > best:
                best = r
                found = 1
                bd = d
                bs = s_new
                bg = g_new
                bp = p_new
        if not found:
            continue
        s2 = bs
        g2 = bg
        pp = bp
        w[j] = wj + bd
        rem = j
        for a in range(dim):
            c = rem // strides[a]
            rem -= c * strides[a]
            base = j - c * strides[a]
            for mm in range(n):
                kw[base + ((c + mm) % n) * strides[a]] += bd * k1[mm]
        accepted += 1
    return s2, g2, pp, accepted
