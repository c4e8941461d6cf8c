"""Pure NumPy implementation of the theta-function kernels.

Mirrors the compiled ``_kernels`` extension function for function; the
backend selector in :mod:`torusvortex._backend` picks one at import time.

All routines take flat float64 arrays of displacements ``(x, y)`` on the
``l x w`` torus and reduce them to minimal images internally. With
``zeta = pi (x + i y) / l`` and ``q = exp(-pi w / l)`` the Green's function is

    F = log|sin zeta| + sum_n log|1 - q^(2n) e^(2 i zeta)| |1 - q^(2n) e^(-2 i zeta)|
        + log 2 - pi w / (6 l) - pi y^2 / (l w)

which is ``log|theta_1(zeta; i w / l)| - pi y^2 / (l w)`` shifted to zero mean.
"""
import numpy as np


def _minimal(x, y, l, w):
    return x - l * np.floor(x / l + 0.5), y - w * np.floor(y / w + 0.5)


def _nome_powers(l, w, nterms):
    q = np.exp(-np.pi * w / l)
    return q ** (2.0 * np.arange(1, nterms + 1))


def green_eval(x, y, l, w, nterms):
    x, y = _minimal(np.asarray(x, dtype=float), np.asarray(y, dtype=float), l, w)
    a = np.pi * x / l
    b = np.pi * y / l
    val = 0.5 * np.log(np.sin(a) ** 2 + np.sinh(b) ** 2)
    c2a = np.cos(2.0 * a)
    for qn in _nome_powers(l, w, nterms):
        rp = qn * np.exp(-2.0 * b)
        rm = qn * np.exp(2.0 * b)
        val += 0.5 * (np.log1p(rp * rp - 2.0 * rp * c2a) + np.log1p(rm * rm - 2.0 * rm * c2a))
    return val + np.log(2.0) - np.pi * w / (6.0 * l) - np.pi * y * y / (l * w)


def green_regular(x, y, l, w, nterms):
    """F(p) - log|p| on minimal images, finite at p = 0."""
    x, y = _minimal(np.asarray(x, dtype=float), np.asarray(y, dtype=float), l, w)
    a = np.pi * x / l
    b = np.pi * y / l
    r2 = a * a + b * b
    safe = np.where(r2 > 0.0, r2, 1.0)
    ratio = np.where(r2 > 0.0, (np.sin(a) ** 2 + np.sinh(b) ** 2) / safe, 1.0)
    val = 0.5 * np.log(ratio) + np.log(np.pi / l)
    c2a = np.cos(2.0 * a)
    for qn in _nome_powers(l, w, nterms):
        rp = qn * np.exp(-2.0 * b)
        rm = qn * np.exp(2.0 * b)
        val += 0.5 * (np.log1p(rp * rp - 2.0 * rp * c2a) + np.log1p(rm * rm - 2.0 * rm * c2a))
    return val + np.log(2.0) - np.pi * w / (6.0 * l) - np.pi * y * y / (l * w)


def _log_derivative(zeta, l, w, nterms):
    """d/dzeta log theta_1 on minimal-image arguments."""
    lg = np.cos(zeta) / np.sin(zeta)
    ep = np.exp(2j * zeta)
    em = np.exp(-2j * zeta)
    for qn in _nome_powers(l, w, nterms):
        lg += 2j * (qn * em / (1.0 - qn * em) - qn * ep / (1.0 - qn * ep))
    return lg


def green_grad(x, y, l, w, nterms):
    x, y = _minimal(np.asarray(x, dtype=float), np.asarray(y, dtype=float), l, w)
    zeta = np.pi * (x + 1j * y) / l
    lg = _log_derivative(zeta, l, w, nterms)
    gx = (np.pi / l) * lg.real
    gy = -(np.pi / l) * lg.imag - 2.0 * np.pi * y / (l * w)
    return gx, gy


def theta_phase(x, y, l, w, nterms):
    """Unit complex number theta_1(pi p / l) / |theta_1(pi p / l)|.

    ``p`` is NOT reduced: the quasi-periodicity of theta_1 under the
    lattice shifts is applied exactly, so the result is the analytic
    continuation to the given representative.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = np.floor(x / l + 0.5)
    n = np.floor(y / w + 0.5)
    xm = x - m * l
    ym = y - n * w
    zeta = np.pi * (xm + 1j * ym) / l
    val = np.sin(zeta)
    ep = np.exp(2j * zeta)
    em = np.exp(-2j * zeta)
    for qn in _nome_powers(l, w, nterms):
        val = val * (1.0 - qn * ep) * (1.0 - qn * em)
    val = val / np.abs(val)
    shift = np.pi * (m + n) - 2.0 * n * zeta.real
    return val * np.exp(1j * shift)


def pair_gradient_sums(pos, deg, l, w, nterms):
    """Return (S, dmin) with S_j = sum_{k != j} d_k grad F(a_j - a_k).

    ``dmin`` is the minimum pairwise torus distance.
    """
    pos = np.asarray(pos, dtype=float)
    deg = np.asarray(deg, dtype=float)
    n = pos.shape[0]
    dx = pos[:, 0][:, None] - pos[:, 0][None, :]
    dy = pos[:, 1][:, None] - pos[:, 1][None, :]
    off = ~np.eye(n, dtype=bool)
    mx, my = _minimal(dx[off], dy[off], l, w)
    dmin = float(np.sqrt(mx * mx + my * my).min()) if n > 1 else np.inf
    out = np.zeros((n, 2))
    if n < 2 or dmin == 0.0:
        return out, dmin
    gx, gy = green_grad(mx, my, l, w, nterms)
    gxm = np.zeros((n, n))
    gym = np.zeros((n, n))
    gxm[off] = gx
    gym[off] = gy
    out[:, 0] = gxm @ deg
    out[:, 1] = gym @ deg
    return out, dmin
