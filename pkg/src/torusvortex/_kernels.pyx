# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled theta-function kernels; see ``_kernels_py`` for the formulas."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sinh, exp, log, log1p, sqrt, floor, M_PI, INFINITY

cnp.import_array()

cdef extern from "complex.h" nogil:
    double complex csin(double complex)
    double complex ccos(double complex)
    double complex cexp(double complex)
    double cabs(double complex)
    double creal(double complex)
    double cimag(double complex)


cdef inline double _series_log(double a, double b, const double* qpow, int nterms) nogil:
    cdef double c2a = cos(2.0 * a)
    cdef double eb = exp(2.0 * b)
    cdef double ebi = 1.0 / eb
    cdef double acc = 0.0, rp, rm
    cdef int k
    for k in range(nterms):
        rp = qpow[k] * ebi
        rm = qpow[k] * eb
        acc += 0.5 * (log1p(rp * rp - 2.0 * rp * c2a) + log1p(rm * rm - 2.0 * rm * c2a))
    return acc


cdef inline double complex _log_derivative(double complex zeta, const double* qpow, int nterms) nogil:
    cdef double complex lg = ccos(zeta) / csin(zeta)
    cdef double complex ep = cexp(2j * zeta)
    cdef double complex em = cexp(-2j * zeta)
    cdef int k
    cdef double qn
    for k in range(nterms):
        qn = qpow[k]
        lg = lg + 2j * (qn * em / (1.0 - qn * em) - qn * ep / (1.0 - qn * ep))
    return lg


cdef cnp.ndarray _qpowers(double l, double w, int nterms):
    cdef double q = exp(-M_PI * w / l)
    return np.ascontiguousarray(q ** (2.0 * np.arange(1, nterms + 1)), dtype=np.float64)


def green_eval(x, y, double l, double w, int nterms):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64).ravel()
    cdef cnp.ndarray qarr = _qpowers(l, w, nterms)
    cdef double[::1] qv = qarr
    cdef Py_ssize_t n = xv.shape[0], i
    out = np.empty(n)
    cdef double[::1] ov = out
    cdef double xm, ym, a, b, const = log(2.0) - M_PI * w / (6.0 * l)
    with nogil:
        for i in range(n):
            xm = xv[i] - l * floor(xv[i] / l + 0.5)
            ym = yv[i] - w * floor(yv[i] / w + 0.5)
            a = M_PI * xm / l
            b = M_PI * ym / l
            ov[i] = (0.5 * log(sin(a) * sin(a) + sinh(b) * sinh(b))
                     + _series_log(a, b, &qv[0], nterms) + const - M_PI * ym * ym / (l * w))
    return out.reshape(np.shape(x))


def green_regular(x, y, double l, double w, int nterms):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64).ravel()
    cdef cnp.ndarray qarr = _qpowers(l, w, nterms)
    cdef double[::1] qv = qarr
    cdef Py_ssize_t n = xv.shape[0], i
    out = np.empty(n)
    cdef double[::1] ov = out
    cdef double xm, ym, a, b, r2, ratio
    cdef double const = log(2.0) - M_PI * w / (6.0 * l) + log(M_PI / l)
    with nogil:
        for i in range(n):
            xm = xv[i] - l * floor(xv[i] / l + 0.5)
            ym = yv[i] - w * floor(yv[i] / w + 0.5)
            a = M_PI * xm / l
            b = M_PI * ym / l
            r2 = a * a + b * b
            if r2 > 0.0:
                ratio = (sin(a) * sin(a) + sinh(b) * sinh(b)) / r2
            else:
                ratio = 1.0
            ov[i] = (0.5 * log(ratio) + _series_log(a, b, &qv[0], nterms)
                     + const - M_PI * ym * ym / (l * w))
    return out.reshape(np.shape(x))


def green_grad(x, y, double l, double w, int nterms):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64).ravel()
    cdef cnp.ndarray qarr = _qpowers(l, w, nterms)
    cdef double[::1] qv = qarr
    cdef Py_ssize_t n = xv.shape[0], i
    gx = np.empty(n)
    gy = np.empty(n)
    cdef double[::1] gxv = gx
    cdef double[::1] gyv = gy
    cdef double xm, ym
    cdef double complex lg
    with nogil:
        for i in range(n):
            xm = xv[i] - l * floor(xv[i] / l + 0.5)
            ym = yv[i] - w * floor(yv[i] / w + 0.5)
            lg = _log_derivative(M_PI * (xm + 1j * ym) / l, &qv[0], nterms)
            gxv[i] = (M_PI / l) * creal(lg)
            gyv[i] = -(M_PI / l) * cimag(lg) - 2.0 * M_PI * ym / (l * w)
    return gx.reshape(np.shape(x)), gy.reshape(np.shape(x))


def theta_phase(x, y, double l, double w, int nterms):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64).ravel()
    cdef cnp.ndarray qarr = _qpowers(l, w, nterms)
    cdef double[::1] qv = qarr
    cdef Py_ssize_t n = xv.shape[0], i
    cdef int k
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef double m, nn, xm, ym, qn
    cdef double complex zeta, val, ep, em
    with nogil:
        for i in range(n):
            m = floor(xv[i] / l + 0.5)
            nn = floor(yv[i] / w + 0.5)
            xm = xv[i] - m * l
            ym = yv[i] - nn * w
            zeta = M_PI * (xm + 1j * ym) / l
            val = csin(zeta)
            ep = cexp(2j * zeta)
            em = cexp(-2j * zeta)
            for k in range(nterms):
                qn = qv[k]
                val = val * (1.0 - qn * ep) * (1.0 - qn * em)
            val = val / cabs(val)
            ov[i] = val * cexp(1j * (M_PI * (m + nn) - 2.0 * nn * creal(zeta)))
    return out.reshape(np.shape(x))


def pair_gradient_sums(pos, deg, double l, double w, int nterms):
    cdef const double[:, ::1] pv = np.ascontiguousarray(pos, dtype=np.float64)
    cdef const double[::1] dv = np.ascontiguousarray(deg, dtype=np.float64)
    cdef cnp.ndarray qarr = _qpowers(l, w, nterms)
    cdef double[::1] qv = qarr
    cdef Py_ssize_t n = pv.shape[0], j, k
    out = np.zeros((n, 2))
    cdef double[:, ::1] ov = out
    cdef double xm, ym, d2, dmin2 = INFINITY, gx, gy
    cdef double complex lg
    with nogil:
        for j in range(n):
            for k in range(j + 1, n):
                xm = pv[j, 0] - pv[k, 0]
                ym = pv[j, 1] - pv[k, 1]
                xm = xm - l * floor(xm / l + 0.5)
                ym = ym - w * floor(ym / w + 0.5)
                d2 = xm * xm + ym * ym
                if d2 < dmin2:
                    dmin2 = d2
        if dmin2 > 0.0:
            for j in range(n):
                for k in range(j + 1, n):
                    xm = pv[j, 0] - pv[k, 0]
                    ym = pv[j, 1] - pv[k, 1]
                    xm = xm - l * floor(xm / l + 0.5)
                    ym = ym - w * floor(ym / w + 0.5)
                    lg = _log_derivative(M_PI * (xm + 1j * ym) / l, &qv[0], nterms)
                    gx = (M_PI / l) * creal(lg)
                    gy = -(M_PI / l) * cimag(lg) - 2.0 * M_PI * ym / (l * w)
                    # grad F is odd: the (k, j) term is the negated (j, k) term
                    ov[j, 0] += dv[k] * gx
                    ov[j, 1] += dv[k] * gy
                    ov[k, 0] -= dv[j] * gx
                    ov[k, 1] -= dv[j] * gy
    return out, sqrt(dmin2)
