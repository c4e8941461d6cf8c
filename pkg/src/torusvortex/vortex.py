"""Vortex detection by plaquette winding and greedy nearest-neighbour tracking."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import TrackingLost
from .field import ComplexField, plaquette_winding
from .renorm import VortexConfiguration


@dataclass(frozen=True)
class VortexObservation:
    position: tuple
    degree: int
    t: float
    quality: float


def _bilinear_zero(c00, c10, c01, c11):
    """Zero of the bilinear interpolant on the unit cell, in local ``(s, t)``.

    Newton from the cell center; if it leaves the cell neighbourhood the
    affine least-squares fit of the four corners is used instead.
    """
    s, t = 0.5, 0.5
    for _ in range(30):
        v = c00 * (1 - s) * (1 - t) + c10 * s * (1 - t) + c01 * (1 - s) * t + c11 * s * t
        ds = (c10 - c00) * (1 - t) + (c11 - c01) * t
        dt = (c01 - c00) * (1 - s) + (c11 - c10) * s
        A = np.array([[ds.real, dt.real], [ds.imag, dt.imag]])
        det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
        if abs(det) < 1e-300:
            break
        step = np.linalg.solve(A, [-v.real, -v.imag])
        s, t = s + step[0], t + step[1]
        if abs(step[0]) + abs(step[1]) < 1e-13:
            break
    if -0.5 <= s <= 1.5 and -0.5 <= t <= 1.5 and math.isfinite(s) and math.isfinite(t):
        return min(max(s, 0.0), 1.0), min(max(t, 0.0), 1.0)
    # affine fallback: u ~ p + q s + r t
    M = np.array([[1, 0, 0], [1, 1, 0], [1, 0, 1], [1, 1, 1]], dtype=float)
    vals = np.array([c00, c10, c01, c11])
    coef, *_ = np.linalg.lstsq(M, np.column_stack([vals.real, vals.imag]), rcond=None)
    A = coef[1:].T
    try:
        s, t = np.linalg.solve(A, -coef[0])
    except np.linalg.LinAlgError:
        s, t = 0.5, 0.5
    return min(max(float(s), 0.0), 1.0), min(max(float(t), 0.0), 1.0)


def detect(u: ComplexField):
    """All cells whose phase winds by +-2 pi, refined to sub-cell positions."""
    w = plaquette_winding(u)
    s = u.samples
    mx, my = s.shape
    hx, hy = u.spacing
    g = u.geometry
    out = []
    for i, j in np.argwhere(w != 0):
        d = int(w[i, j])
        if abs(d) != 1:
            continue
        i1, j1 = (i + 1) % mx, (j + 1) % my
        c00, c10, c01, c11 = s[i, j], s[i1, j], s[i, j1], s[i1, j1]
        ls, lt = _bilinear_zero(c00, c10, c01, c11)
        x = ((i + ls) * hx) % g.l
        y = ((j + lt) * hy) % g.w
        quality = float(min(abs(c00), abs(c10), abs(c01), abs(c11)))
        out.append(VortexObservation((x, y), d, u.time, quality))
    return out


def jacobian_centroids(u: ComplexField, centers, radius: float):
    """Centroid of ``J(u)`` within ``radius`` of each center (cross-check statistic)."""
    from .field import densities

    _, _, jac = densities(u)
    X, Y = u.nodes()
    g = u.geometry
    res = []
    for c in centers:
        m = g.minimal_image(np.stack([X - c[0], Y - c[1]], axis=-1))
        inside = np.hypot(m[..., 0], m[..., 1]) < radius
        wgt = jac.values[inside]
        tot = wgt.sum()
        res.append((c[0] + float((m[..., 0][inside] * wgt).sum() / tot),
                    c[1] + float((m[..., 1][inside] * wgt).sum() / tot)))
    return res


@dataclass
class VortexPaths:
    """Tracked vortices in the order of the initial configuration.

    ``positions`` has shape ``(n_snapshots, 2N, 2)`` and holds continuous
    lifts (each step adds the minimal-image displacement).
    """

    times: np.ndarray
    positions: np.ndarray
    degrees: np.ndarray
    quality: np.ndarray
    status: str = "tracked"
    lost_time: float | None = None
    message: str = ""
    observations: list = field(default_factory=list, repr=False)

    def velocities(self) -> np.ndarray:
        """Least-squares constant velocity of each path, shape ``(2N, 2)``."""
        t = self.times - self.times.mean()
        den = float(np.sum(t * t))
        if den == 0:
            return np.zeros((self.positions.shape[1], 2))
        return np.einsum("t,tjk->jk", t, self.positions - self.positions.mean(axis=0)) / den

    def max_speed(self) -> float:
        if len(self.times) < 2:
            return 0.0
        dp = np.linalg.norm(np.diff(self.positions, axis=0), axis=2)
        return float(np.max(dp / np.diff(self.times)[:, None]))


def track(snapshots, a0: VortexConfiguration, max_jump: float, raise_on_loss: bool = True) -> VortexPaths:
    """Assign detections to the vortices of ``a0`` snapshot by snapshot.

    Pairs closer than ``max_jump`` are matched greedily by distance. A
    closest free pair with different degrees, or a vortex left without a
    match, loses the track.
    """
    g = a0.geometry
    prev = np.array(a0.positions, dtype=float)
    deg = np.array(a0.degrees)
    n = len(deg)
    times, pos, qual, kept = [], [], [], []
    for obs in snapshots:
        obs = list(obs)
        t = obs[0].t if obs else (times[-1] if times else 0.0)
        try:
            new, q = _assign(prev, deg, obs, g, max_jump, t)
        except TrackingLost as exc:
            if raise_on_loss:
                raise
            return VortexPaths(np.array(times), np.array(pos).reshape(-1, n, 2), deg,
                               np.array(qual).reshape(-1, n), "lost", exc.t, str(exc), kept)
        prev = new
        times.append(t)
        pos.append(new.copy())
        qual.append(q)
        kept.append(obs)
    return VortexPaths(np.array(times), np.array(pos).reshape(-1, n, 2), deg,
                       np.array(qual).reshape(-1, n), "tracked", None, "", kept)


def _assign(prev, deg, obs, g, max_jump, t):
    n = len(deg)
    if not obs:
        raise TrackingLost(t, "no vortices detected")
    P = np.array([o.position for o in obs], dtype=float)
    D = g.distance(prev[:, None, :], P[None, :, :])
    order = np.argsort(D, axis=None, kind="stable")
    used_p, used_o = set(), set()
    new = prev.copy()
    q = np.zeros(n)
    for flat in order:
        jv, io = divmod(int(flat), len(obs))
        if D[jv, io] > max_jump:
            break
        if jv in used_p or io in used_o:
            continue
        if obs[io].degree != deg[jv]:
            raise TrackingLost(t, f"degree mismatch for vortex {jv} at distance {D[jv, io]:.3g}")
        used_p.add(jv)
        used_o.add(io)
        new[jv] = prev[jv] + g.minimal_image(P[io] - prev[jv])
        q[jv] = obs[io].quality
    if len(used_p) < n:
        missing = sorted(set(range(n)) - used_p)
        raise TrackingLost(t, f"vortices {missing} have no detection within {max_jump:.3g}")
    return new, q


def default_max_jump(h: float, dt_snapshot: float) -> float:
    return 5.0 * h + 20.0 * dt_snapshot
