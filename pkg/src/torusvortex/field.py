"""Grid fields: canonical harmonic maps, well-prepared data, densities, identities.

Sample ``[i, j]`` of a field sits at ``(i l / M_x, j w / M_y)``; axis 0 is x.
"""
from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import CollidedConfiguration, GeometryError, ResolutionError, SingularPoint
from .green import SINGULAR_TOL, TorusGeometry, UNIT_TORUS, smooth_cutoff
from .renorm import VortexConfiguration, apply_J, evaluator_for, grad_WT, q_of

VXF_MAGIC = b"VXF1"
_HEADER = struct.Struct("<4sIIdddd")


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def grid_shape(grid) -> tuple:
    if np.isscalar(grid):
        return int(grid), int(grid)
    mx, my = grid
    return int(mx), int(my)


def grid_nodes(geometry: TorusGeometry, grid):
    """Node coordinate arrays ``X, Y`` of shape ``(M_x, M_y)``."""
    mx, my = grid_shape(grid)
    xs = np.arange(mx) * (geometry.l / mx)
    ys = np.arange(my) * (geometry.w / my)
    return np.meshgrid(xs, ys, indexing="ij")


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex samples on a uniform periodic grid."""

    samples: np.ndarray
    geometry: TorusGeometry = UNIT_TORUS
    eps: float = 0.0
    time: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.complex128)
        if s.ndim != 2:
            raise ValueError("samples must be a 2-D array")
        mx, my = s.shape
        if not (_is_pow2(mx) and _is_pow2(my) and mx >= 16 and my >= 16):
            raise ValueError(f"grid must be powers of two >= 16, got {s.shape}")
        if self.eps < 0:
            raise ValueError("eps must be non-negative")
        object.__setattr__(self, "samples", s)

    @property
    def shape(self):
        return self.samples.shape

    @property
    def spacing(self):
        mx, my = self.shape
        return self.geometry.l / mx, self.geometry.w / my

    @property
    def cell_area(self) -> float:
        hx, hy = self.spacing
        return hx * hy

    def sample(self, i: int, j: int) -> complex:
        mx, my = self.shape
        return complex(self.samples[i % mx, j % my])

    def nodes(self):
        return grid_nodes(self.geometry, self.shape)

    def replace(self, samples=None, time=None) -> "ComplexField":
        return ComplexField(self.samples if samples is None else samples, self.geometry, self.eps,
                            self.time if time is None else time)


@dataclass(frozen=True, eq=False)
class DensityField:
    kind: str
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in ("current", "energy", "jacobian"):
            raise ValueError(f"unknown density kind {self.kind!r}")


# -- harmonic map and its current ---------------------------------------------

def _nudged_positions(a: VortexConfiguration, grid):
    """Shift centers sitting on a grid node by half a cell (both axes)."""
    g = a.geometry
    mx, my = grid_shape(grid)
    hx, hy = g.l / mx, g.w / my
    pos = np.array(a.positions)
    fx = pos[:, 0] / hx
    fy = pos[:, 1] / hy
    on_node = (np.abs(fx - np.round(fx)) < 1e-9) & (np.abs(fy - np.round(fy)) < 1e-9)
    if np.any(on_node):
        pos[on_node] += np.array([0.5 * hx, 0.5 * hy])
    return pos, bool(np.any(on_node))


def harmonic_map(a: VortexConfiguration, grid) -> ComplexField:
    """Canonical unimodular map with the vortices of ``a``.

    Its phase is ``sum_k d_k arg theta_1(pi (z - a_k) / l) - 2 pi S_x y / (l w)``
    with ``S = sum_k d_k a_k`` (lifted), whose gradient is the current
    ``-J sum_k d_k grad F(x - a_k) + 2 pi q(a) / (l w)``. The theta phase is
    continued exactly across lattice shifts, so no branch cuts appear.
    """
    if a.min_distance() < 1e-10:
        raise CollidedConfiguration("vortices coincide")
    g = a.geometry
    ev = evaluator_for(g)
    pos, _ = _nudged_positions(a, grid)
    X, Y = grid_nodes(g, grid)
    H = np.ones(X.shape, dtype=np.complex128)
    for (px, py), d in zip(pos, a.degrees):
        t = ev.theta_phase(X - px, Y - py)
        H *= t if d > 0 else np.conj(t)
    sx = float(a.degrees @ pos[:, 0])
    H *= np.exp(-2j * math.pi * sx * Y / g.area)
    # strip the rounding drift of the product
    H /= np.abs(H)
    return ComplexField(H, g, 0.0, 0.0)


def analytic_current_values(a: VortexConfiguration, X, Y):
    """Closed-form ``j(H)`` at arrays of points; returns ``(jx, jy)``."""
    g = a.geometry
    ev = evaluator_for(g)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    sx = np.zeros(X.shape)
    sy = np.zeros(X.shape)
    for (px, py), d in zip(a.positions, a.degrees):
        gx, gy = ev.grad_values(X - px, Y - py)
        sx += d * gx
        sy += d * gy
    q = q_of(a) * (2.0 * math.pi / g.area)
    # -J (sx, sy) = (-sy, sx)
    return -sy + q[0], sx + q[1]


def analytic_current(a: VortexConfiguration, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    d = a.geometry.distance(a.positions, p[None, :])
    if np.min(d) < SINGULAR_TOL:
        raise SingularPoint("current is singular at a vortex center")
    jx, jy = analytic_current_values(a, p[0], p[1])
    return np.array([float(jx), float(jy)])


def phase_current(u: ComplexField):
    """Fourth-order finite-difference gradient of the phase of ``u``.

    Differences are taken as ``arg(u_{i+k} conj(u_{i-k}))`` so the phase
    never needs unwrapping; valid while adjacent phase jumps stay below pi.
    """
    hx, hy = u.spacing
    s = u.samples

    def d(axis, h):
        p1 = np.angle(np.roll(s, -1, axis) * np.conj(np.roll(s, 1, axis)))
        p2 = np.angle(np.roll(s, -2, axis) * np.conj(np.roll(s, 2, axis)))
        return (8.0 * p1 - p2) / (12.0 * h)

    return d(0, hx), d(1, hy)


def plaquette_winding(u: ComplexField) -> np.ndarray:
    """Integer winding of the phase around each grid cell ``[i, i+1] x [j, j+1]``."""
    s = u.samples
    s10 = np.roll(s, -1, 0)
    s11 = np.roll(s10, -1, 1)
    s01 = np.roll(s, -1, 1)
    tot = (np.angle(s10 * np.conj(s)) + np.angle(s11 * np.conj(s10))
           + np.angle(s01 * np.conj(s11)) + np.angle(s * np.conj(s01)))
    return np.rint(tot / (2.0 * math.pi)).astype(int)


def current_integral(a: VortexConfiguration, grid) -> np.ndarray:
    """Torus integral of the closed-form current.

    The odd singular part ``-d_k J x / |x|^2`` times a radial cutoff has zero
    integral; removing it leaves a smooth periodic integrand for which the
    trapezoidal rule is spectrally accurate.
    """
    g = a.geometry
    ev = evaluator_for(g)
    X, Y = grid_nodes(g, grid)
    R = min(0.5 * a.min_distance(), 0.25 * min(g.l, g.w))
    jx = np.zeros(X.shape)
    jy = np.zeros(X.shape)
    for (px, py), d in zip(a.positions, a.degrees):
        m = g.minimal_image(np.stack([X - px, Y - py], axis=-1))
        r2 = m[..., 0] ** 2 + m[..., 1] ** 2
        at = r2 < SINGULAR_TOL ** 2
        safe = np.where(at, 1.0, r2)
        chi = smooth_cutoff(np.sqrt(r2) / R)
        gx, gy = ev.grad_values(np.where(at, 0.5 * g.l, m[..., 0]), np.where(at, 0.5 * g.w, m[..., 1]))
        # regular remainder of grad F; its limit at the center vanishes by evenness
        rx = np.where(at, 0.0, gx - chi * m[..., 0] / safe)
        ry = np.where(at, 0.0, gy - chi * m[..., 1] / safe)
        jx += -d * ry
        jy += d * rx
    q = q_of(a) * (2.0 * math.pi / g.area)
    hx, hy = g.l / X.shape[0], g.w / X.shape[1]
    return np.array([jx.sum() * hx * hy + q[0] * g.area, jy.sum() * hx * hy + q[1] * g.area])


# -- well-prepared initial data -------------------------------------------------

def _far_blend(d, geometry):
    """Cutoff tapering ``1 - f`` to zero before the torus cut locus."""
    return smooth_cutoff(d / (0.5 * min(geometry.l, geometry.w)))


def modulus_profile(a: VortexConfiguration, eps: float, grid, profile=None) -> np.ndarray:
    """``prod_j f(|x - a_j| / eps)`` with ``1 - f`` blended to zero far from each core."""
    from .core import tanh_profile

    prof = tanh_profile if profile is None else profile
    g = a.geometry
    X, Y = grid_nodes(g, grid)
    rho = np.ones(X.shape)
    for px, py in a.positions:
        d = g.distance(np.stack([X, Y], axis=-1), np.array([px, py]))
        rho *= 1.0 - (1.0 - prof(d / eps)) * _far_blend(d, g)
    return rho


def build_initial_data(a: VortexConfiguration, eps: float, grid, profile=None) -> ComplexField:
    """``u0 = rho H`` with ``rho = prod_j f(|x - a_j|_T / eps)``.

    ``profile`` is a callable of the distance in core units, normally a
    :class:`torusvortex.core.CoreProfile`; ``None`` selects ``tanh``.
    """
    mx, my = grid_shape(grid)
    g = a.geometry
    h = max(g.l / mx, g.w / my)
    if not eps > 0:
        raise ValueError("eps must be positive")
    if h > eps / 4.0 * (1.0 + 1e-12):
        raise ResolutionError(f"grid spacing {h:.4g} exceeds eps/4 = {eps / 4:.4g}")
    if eps > a.min_distance() / 8.0:
        warnings.warn(f"eps = {eps} exceeds min vortex distance / 8; cores overlap noticeably", stacklevel=2)
    H = harmonic_map(a, (mx, my))
    # the modulus must vanish where the phase is singular
    pos, _ = _nudged_positions(a, (mx, my))
    rho = modulus_profile(a.with_positions(pos), eps, (mx, my), profile)
    return ComplexField(rho * H.samples, g, eps, 0.0)


def plane_wave(geometry: TorusGeometry, grid, k, eps: float = 0.0) -> ComplexField:
    """``exp(2 pi i (k_x x / l + k_y y / w))`` for an integer lattice mode ``k``."""
    X, Y = grid_nodes(geometry, grid)
    ph = 2.0 * math.pi * (k[0] * X / geometry.l + k[1] * Y / geometry.w)
    return ComplexField(np.exp(1j * ph), geometry, eps, 0.0)


# -- densities ----------------------------------------------------------------

def wavenumbers(geometry: TorusGeometry, shape, nyquist_zero: bool = True):
    """Angular wavenumbers ``2 pi k / l`` and ``2 pi k / w`` as broadcastable arrays."""
    mx, my = shape
    kx = 2.0 * math.pi * np.fft.fftfreq(mx, d=geometry.l / mx)
    ky = 2.0 * math.pi * np.fft.fftfreq(my, d=geometry.w / my)
    if nyquist_zero:
        kx[mx // 2] = 0.0
        ky[my // 2] = 0.0
    return kx[:, None], ky[None, :]


def spectral_gradient(u: ComplexField):
    kx, ky = wavenumbers(u.geometry, u.shape)
    uh = np.fft.fft2(u.samples)
    return np.fft.ifft2(1j * kx * uh), np.fft.ifft2(1j * ky * uh)


def densities(u: ComplexField):
    """Current, energy and Jacobian densities with spectral derivatives.

    The potential term of the energy is omitted when ``u.eps == 0``.
    """
    ux, uy = spectral_gradient(u)
    v = u.samples
    jx = np.imag(np.conj(v) * ux)
    jy = np.imag(np.conj(v) * uy)
    e = 0.5 * (np.abs(ux) ** 2 + np.abs(uy) ** 2)
    if u.eps > 0:
        e = e + (1.0 - np.abs(v) ** 2) ** 2 / (4.0 * u.eps ** 2)
    jac = np.imag(np.conj(ux) * uy)
    return (DensityField("current", np.stack([jx, jy])), DensityField("energy", e),
            DensityField("jacobian", jac))


def observables(u: ComplexField):
    """``(mass, momentum, energy)`` by trapezoidal quadrature."""
    cur, en, _ = densities(u)
    w = u.cell_area
    mass = float(np.sum(np.abs(u.samples) ** 2) * w)
    mom = np.array([cur.values[0].sum() * w, cur.values[1].sum() * w])
    return mass, mom, float(en.values.sum() * w)


def bump_pairing(u: ComplexField, center, radius: float) -> float:
    """``int J(u) phi`` for a smooth bump ``phi`` of unit height within ``radius/2``."""
    _, _, jac = densities(u)
    X, Y = u.nodes()
    d = u.geometry.distance(np.stack([X, Y], axis=-1), np.asarray(center, dtype=float))
    return float(np.sum(jac.values * smooth_cutoff(d / radius)) * u.cell_area)


# -- annulus energy ------------------------------------------------------------

def _current_sq(a, X, Y):
    jx, jy = analytic_current_values(a, X, Y)
    return jx * jx + jy * jy


def annulus_energy(a: VortexConfiguration, rho: float, grid, nr: int = 64, ntheta: int = 256) -> float:
    """``int_{T minus union B_rho(a_j)} e(H)`` with ``e(H) = |j(H)|^2 / 2``.

    The integrand is split with smooth radial cutoffs of radius ``R`` (half
    the minimal distance) around each vortex: the far part is smooth and
    periodic and is summed on the grid; each near part is integrated on
    ``rho < r < R`` with Gauss-Legendre in ``log r`` and the trapezoidal
    rule in angle.
    """
    g = a.geometry
    mx, my = grid_shape(grid)
    h = max(g.l / mx, g.w / my)
    dmin = a.min_distance()
    if rho < 4.0 * h * (1.0 - 1e-12):
        raise ResolutionError(f"rho = {rho} is below four grid cells ({4 * h:.4g})")
    if rho > dmin / 4.0 * (1.0 + 1e-12):
        raise ResolutionError(f"rho = {rho} exceeds min distance / 4 = {dmin / 4:.4g}")
    R = min(0.5 * dmin, 0.5 * min(g.l, g.w))
    X, Y = grid_nodes(g, (mx, my))
    weight = np.ones(X.shape)
    for px, py in a.positions:
        d = g.distance(np.stack([X, Y], axis=-1), np.array([px, py]))
        weight -= smooth_cutoff(d / R)
    keep = weight > 0.0
    far = 0.5 * float(np.sum(_current_sq(a, X[keep], Y[keep]) * weight[keep])) * (g.l / mx) * (g.w / my)
    xg, wg = np.polynomial.legendre.leggauss(nr)
    t0, t1 = math.log(rho), math.log(R)
    t = 0.5 * (t1 - t0) * (xg + 1.0) + t0
    wt = 0.5 * (t1 - t0) * wg
    r = np.exp(t)
    th = 2.0 * math.pi * np.arange(ntheta) / ntheta
    near = 0.0
    for px, py in a.positions:
        Rr, Tt = np.meshgrid(r, th, indexing="ij")
        jsq = _current_sq(a, px + Rr * np.cos(Tt), py + Rr * np.sin(Tt))
        # dA = r dr dtheta = r^2 dt dtheta
        integrand = 0.5 * jsq * smooth_cutoff(Rr / R) * Rr * Rr
        near += float(np.sum(integrand * wt[:, None]) * (2.0 * math.pi / ntheta))
    return far + near


# -- Hessian pairing -------------------------------------------------------------

_INNER = 0.75


def _taper(t):
    """C-infinity step falling from 1 (t <= 0) to 0 (t >= 1) and its first two derivatives."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    inside = (t > 0.0) & (t < 1.0)
    ts = np.where(inside, t, 0.5)
    g = 1.0 / (1.0 - ts) - 1.0 / ts
    dg = 1.0 / ts ** 2 + 1.0 / (1.0 - ts) ** 2
    d2g = -2.0 / ts ** 3 + 2.0 / (1.0 - ts) ** 3
    s = expit(-g)
    s1 = -s * (1.0 - s) * dg
    s2 = -s1 * (1.0 - 2.0 * s) * dg - s * (1.0 - s) * d2g
    val = np.where(t <= 0.0, 1.0, np.where(t >= 1.0, 0.0, s))
    return val, np.where(inside, s1, 0.0), np.where(inside, s2, 0.0)


def pairing_test_function(nu, r: float):
    """``eta(y) = nu . y c(|y|)`` with ``c = 1`` on ``|y| <= 3r/4`` and 0 beyond ``r``.

    Returns a callable mapping displacement arrays ``(yx, yy)`` to
    ``(eta, H_xx, H_xy, H_yy)``.
    """
    nu = np.asarray(nu, dtype=float)
    width = (1.0 - _INNER) * r

    def f(yx, yy):
        rad = np.hypot(yx, yy)
        c, c1, c2 = _taper((rad - _INNER * r) / width)
        c1 = c1 / width
        c2 = c2 / width ** 2
        safe = np.where(rad > 0, rad, 1.0)
        ux, uy = yx / safe, yy / safe
        # Hess c = c'' u u^T + c'/|y| (I - u u^T)
        cxx = c2 * ux * ux + c1 / safe * (1.0 - ux * ux)
        cxy = c2 * ux * uy - c1 / safe * ux * uy
        cyy = c2 * uy * uy + c1 / safe * (1.0 - uy * uy)
        L = nu[0] * yx + nu[1] * yy
        gx, gy = c1 * ux, c1 * uy
        hxx = 2.0 * nu[0] * gx + L * cxx
        hxy = nu[0] * gy + nu[1] * gx + L * cxy
        hyy = 2.0 * nu[1] * gy + L * cyy
        return L * c, hxx, hxy, hyy

    return f


def hess_pairing_check(a: VortexConfiguration, j: int, r: float, grid, nu=(1.0, 0.0)):
    """Quadrature of ``<Hess(eta) j(H), J j(H)>`` against ``-grad eta(a_j) . J grad_{a_j} W_T``.

    ``eta`` is linear (``nu . (x - a_j)``) near ``a_j`` and supported in
    ``B_r(a_j)``; ``Hess eta`` vanishes on ``B_{3r/4}`` so the integrand is
    smooth and the grid sum converges spectrally.
    """
    g = a.geometry
    others = [k for k in range(len(a)) if k != j]
    dist = g.distance(a.positions[others], a.positions[j][None, :])
    if r <= 0 or r > 0.5 * float(np.min(dist)) * (1.0 + 1e-12) or r >= 0.5 * min(g.l, g.w):
        raise GeometryError(f"B_r(a_{j}) with r = {r} must avoid the other vortices and fit in the torus")
    nu = np.asarray(nu, dtype=float)
    if not np.any(nu):
        return 0.0, 0.0
    X, Y = grid_nodes(g, grid)
    m = g.minimal_image(np.stack([X - a.positions[j, 0], Y - a.positions[j, 1]], axis=-1))
    ring = (np.hypot(m[..., 0], m[..., 1]) > _INNER * r) & (np.hypot(m[..., 0], m[..., 1]) < r)
    yx, yy = m[..., 0][ring], m[..., 1][ring]
    _, hxx, hxy, hyy = pairing_test_function(nu, r)(yx, yy)
    jx, jy = analytic_current_values(a, a.positions[j, 0] + yx, a.positions[j, 1] + yy)
    # Hess(eta) j . J j with J j = (jy, -jx)
    ax = hxx * jx + hxy * jy
    ay = hxy * jx + hyy * jy
    lhs = float(np.sum(ax * jy - ay * jx)) * (g.l / X.shape[0]) * (g.w / X.shape[1])
    rhs = float(-nu @ apply_J(grad_WT(a, j)))
    return lhs, rhs


# -- binary dump -----------------------------------------------------------------

def write_vxf(path, u: ComplexField) -> None:
    """Write the VXF1 dump: little-endian header then interleaved (re, im) f64, row-major."""
    mx, my = u.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(VXF_MAGIC, mx, my, u.geometry.l, u.geometry.w, u.eps, u.time))
        fh.write(np.ascontiguousarray(u.samples, dtype="<c16").tobytes())


def read_vxf(path) -> ComplexField:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValueError(f"{path}: truncated VXF1 header")
        magic, mx, my, l, w, eps, t = _HEADER.unpack(head)
        if magic != VXF_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.size != mx * my:
        raise ValueError(f"{path}: expected {mx * my} samples, found {data.size}")
    return ComplexField(data.reshape(mx, my).astype(np.complex128), TorusGeometry(l, w), eps, t)


def field_summary(u: ComplexField) -> dict:
    mass, mom, energy = observables(u)
    return {
        "grid": list(u.shape),
        "l": u.geometry.l,
        "w": u.geometry.w,
        "eps": u.eps,
        "time": u.time,
        "mass": mass,
        "momentum": mom.tolist(),
        "energy": energy,
        "min_modulus": float(np.min(np.abs(u.samples))),
        "max_modulus": float(np.max(np.abs(u.samples))),
    }

