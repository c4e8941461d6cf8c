"""Periodic Green's function of the flat torus and its gradient.

``F`` solves ``Laplace F = 2 pi (delta - 1/(l w))`` on ``(R/lZ) x (R/wZ)`` with
zero mean. The fast path is the Jacobi theta closed form evaluated by its
product expansion (see :mod:`torusvortex._kernels_py`); the independent
check is a spectral solve on a uniform grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .errors import SingularPoint

SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class TorusGeometry:
    """Flat torus with periods ``l`` (x direction) and ``w`` (y direction)."""

    l: float = 1.0
    w: float = 1.0

    def __post_init__(self):
        if not (self.l > 0 and self.w > 0 and math.isfinite(self.l) and math.isfinite(self.w)):
            raise ValueError(f"torus periods must be positive, got l={self.l}, w={self.w}")

    @property
    def area(self) -> float:
        return self.l * self.w

    def minimal_image(self, p):
        """Representative of ``p`` in ``[-l/2, l/2) x [-w/2, w/2)``."""
        p = np.asarray(p, dtype=float)
        x = p[..., 0] - self.l * np.floor(p[..., 0] / self.l + 0.5)
        y = p[..., 1] - self.w * np.floor(p[..., 1] / self.w + 0.5)
        return np.stack([x, y], axis=-1)

    def distance(self, p, r):
        d = self.minimal_image(np.asarray(p, dtype=float) - np.asarray(r, dtype=float))
        return np.hypot(d[..., 0], d[..., 1])

    def wrap(self, p):
        """Representative in the fundamental domain ``[0, l) x [0, w)``."""
        p = np.asarray(p, dtype=float)
        return np.stack([np.mod(p[..., 0], self.l), np.mod(p[..., 1], self.w)], axis=-1)


UNIT_TORUS = TorusGeometry()


def _required_terms(geometry: TorusGeometry) -> int:
    # product factors are bounded by exp(-pi w/l (2n - 1)); stop below 1e-17
    return int(math.ceil(6.25 * geometry.l / geometry.w + 0.5))


@dataclass(frozen=True)
class GreenEvaluator:
    """Closed-form evaluator of ``F`` and ``grad F`` on one torus.

    Parameters
    ----------
    geometry : TorusGeometry
    series_terms : int
        Minimum number of product factors; raised automatically for
        elongated tori (``w < l``) so the truncation stays below 1e-17.
    oracle_grid : int
        Default grid size of the spectral oracle.
    """

    geometry: TorusGeometry = UNIT_TORUS
    series_terms: int = 12
    oracle_grid: int = 512
    nterms: int = field(init=False, repr=False)

    def __post_init__(self):
        if self.series_terms < 1:
            raise ValueError("series_terms must be >= 1")
        object.__setattr__(self, "nterms", max(self.series_terms, _required_terms(self.geometry)))

    # -- constants -----------------------------------------------------
    @property
    def nome(self) -> float:
        return math.exp(-math.pi * self.geometry.w / self.geometry.l)

    @property
    def mean_offset(self) -> float:
        """Constant added to ``log|theta_1| - pi y^2/(l w)`` to get zero mean.

        Per horizontal line the mean of ``log|theta_1|`` is known in closed
        form (Jensen's formula on each product factor), which gives
        ``pi w/(12 l) - sum_n log(1 - q^(2n))``.
        """
        g = self.geometry
        q2 = self.nome ** (2.0 * np.arange(1, self.nterms + 1))
        return math.pi * g.w / (12.0 * g.l) - float(np.sum(np.log1p(-q2)))

    # -- vectorised fast path -------------------------------------------
    def F_values(self, x, y):
        """F at arbitrary displacement arrays (no singularity guard)."""
        g = self.geometry
        return kernels.green_eval(np.asarray(x, float), np.asarray(y, float), g.l, g.w, self.nterms)

    def grad_values(self, x, y):
        g = self.geometry
        return kernels.green_grad(np.asarray(x, float), np.asarray(y, float), g.l, g.w, self.nterms)

    def regular_values(self, x, y):
        g = self.geometry
        return kernels.green_regular(np.asarray(x, float), np.asarray(y, float), g.l, g.w, self.nterms)

    def theta_phase(self, x, y):
        g = self.geometry
        return kernels.theta_phase(np.asarray(x, float), np.asarray(y, float), g.l, g.w, self.nterms)

    def pair_gradient_sums(self, positions, degrees):
        g = self.geometry
        return kernels.pair_gradient_sums(positions, degrees, g.l, g.w, self.nterms)

    # -- scalar API -----------------------------------------------------
    def _checked(self, p):
        m = self.geometry.minimal_image(np.asarray(p, dtype=float))
        if math.hypot(m[0], m[1]) < SINGULAR_TOL:
            raise SingularPoint(f"F is singular at {tuple(np.asarray(p, float))}")
        return m

    def eval_F(self, p) -> float:
        m = self._checked(p)
        return float(self.F_values(m[0], m[1]))

    def eval_gradF(self, p) -> np.ndarray:
        m = self._checked(p)
        gx, gy = self.grad_values(m[0], m[1])
        return np.array([float(gx), float(gy)])

    def eval_F_regular(self, p) -> float:
        """``F(p) - log|p|`` on the minimal image; finite at the origin."""
        m = self.geometry.minimal_image(np.asarray(p, dtype=float))
        return float(self.regular_values(m[0], m[1]))

    def laplacian_check(self, p, h: float = 1e-4) -> float:
        """Five-point Laplacian of ``F`` at ``p`` (should equal ``-2 pi/(l w)``)."""
        if not 0.0 < h <= 1e-3:
            raise ValueError(f"stencil step must lie in (0, 1e-3], got {h}")
        m = self.geometry.minimal_image(np.asarray(p, dtype=float))
        if math.hypot(m[0], m[1]) <= 2.0 * h:
            raise SingularPoint("five-point stencil straddles the origin")
        x = m[0] + np.array([h, -h, 0.0, 0.0, 0.0])
        y = m[1] + np.array([0.0, 0.0, h, -h, 0.0])
        v = self.F_values(x, y)
        return float((v[0] + v[1] + v[2] + v[3] - 4.0 * v[4]) / (h * h))

    # -- oracles ----------------------------------------------------------
    def spectral_table(self, mx: int | None = None, my: int | None = None) -> np.ndarray:
        """Spectral-grid solve of the defining PDE on an ``mx x my`` grid.

        Returns nodal values at ``(i l/mx, j w/my)``; entry ``[0, 0]`` is the
        (finite) value of the truncated series at the singularity.
        """
        return spectral_green(self.geometry, mx or self.oracle_grid, my or mx or self.oracle_grid)

    def quadrature_mean(self, m: int = 512, rho: float | None = None) -> float:
        """Mean of ``F`` by punctured trapezoidal quadrature on an ``m x m`` grid.

        Nodes within ``rho`` of the singularity are dropped and replaced by
        the disc integral of ``log|x| + F_reg(0)``.
        """
        g = self.geometry
        rho = 2.0 * min(g.l, g.w) / m if rho is None else rho
        xs = np.arange(m) * g.l / m
        ys = np.arange(m) * g.w / m
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        mi = g.minimal_image(np.stack([X, Y], axis=-1))
        keep = np.hypot(mi[..., 0], mi[..., 1]) >= rho
        total = float(self.F_values(X[keep], Y[keep]).sum()) * (g.l / m) * (g.w / m)
        disc = math.pi * rho * rho * (math.log(rho) - 0.5) + math.pi * rho * rho * self.eval_F_regular((0.0, 0.0))
        return (total + disc) / g.area

    def smooth_quadrature_mean(self, m: int = 512, cutoff: float | None = None) -> float:
        """Mean of ``F`` to near machine precision.

        Subtracts ``log r * chi(r)`` with a C-infinity cutoff ``chi``; the
        remainder is smooth and periodic, so the trapezoidal rule converges
        spectrally, and the subtracted radial integral is done by quadrature.
        """
        from scipy.integrate import quad

        g = self.geometry
        R = 0.4 * min(g.l, g.w) if cutoff is None else cutoff
        xs = np.arange(m) * g.l / m
        ys = np.arange(m) * g.w / m
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        mi = g.minimal_image(np.stack([X, Y], axis=-1))
        r = np.hypot(mi[..., 0], mi[..., 1])
        chi = smooth_cutoff(r / R)
        with np.errstate(divide="ignore"):
            smooth = np.where(r > 0, self.F_values(X, Y) - chi * np.log(np.where(r > 0, r, 1.0)), 0.0)
        smooth[r == 0] = self.eval_F_regular((0.0, 0.0))
        total = float(smooth.sum()) * (g.l / m) * (g.w / m)
        radial, _ = quad(lambda s: 2.0 * math.pi * s * math.log(s) * float(smooth_cutoff(s / R)), 0.0, R,
                         limit=200, epsabs=1e-14, epsrel=1e-13)
        return (total + radial) / g.area


def smooth_cutoff(s):
    """C-infinity step: 1 for s <= 1/2, 0 for s >= 1."""
    s = np.asarray(s, dtype=float)
    t = np.clip(2.0 * s - 1.0, 0.0, 1.0)

    def _psi(u):
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)

    a = _psi(1.0 - t)
    b = _psi(t)
    return a / (a + b)


def spectral_green(geometry: TorusGeometry, mx: int, my: int) -> np.ndarray:
    """Inverse DFT of ``-1/(2 pi l w |k|^2)`` over the nonzero modes."""
    kx = np.fft.fftfreq(mx, d=geometry.l / mx)
    ky = np.fft.fftfreq(my, d=geometry.w / my)
    k2 = kx[:, None] ** 2 + ky[None, :] ** 2
    k2[0, 0] = 1.0
    coef = -1.0 / (2.0 * np.pi * geometry.area * k2)
    coef[0, 0] = 0.0
    return np.real(np.fft.ifft2(coef)) * (mx * my)


def green_table(evaluator: GreenEvaluator, m: int):
    """Rows ``(x, y, F, dF/dx, dF/dy)`` on an ``m x m`` node grid, origin excluded."""
    g = evaluator.geometry
    xs = np.arange(m) * g.l / m
    ys = np.arange(m) * g.w / m
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    X = X.ravel()[1:]
    Y = Y.ravel()[1:]
    gx, gy = evaluator.grad_values(X, Y)
    return np.column_stack([X, Y, evaluator.F_values(X, Y), gx, gy])
