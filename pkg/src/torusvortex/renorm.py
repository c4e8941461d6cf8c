"""Renormalized energies, their gradients and the first integrals of the reduced law.

Conventions: ``J = [[0, 1], [-1, 0]]``; ``q(a) = J sum_m d_m a_m`` is taken on
the lifted coordinates stored in the configuration, while every argument of
``F`` is reduced to its minimal image.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CollidedConfiguration
from .green import GreenEvaluator, TorusGeometry, UNIT_TORUS

SYMPLECTIC = np.array([[0.0, 1.0], [-1.0, 0.0]])
COLLISION_TOL = 1e-10


def apply_J(v):
    """``J v`` for a vector or a stack of vectors in the last axis."""
    v = np.asarray(v, dtype=float)
    return np.stack([v[..., 1], -v[..., 0]], axis=-1)


@lru_cache(maxsize=32)
def evaluator_for(geometry: TorusGeometry) -> GreenEvaluator:
    return GreenEvaluator(geometry)


@dataclass(frozen=True, eq=False)
class VortexConfiguration:
    """``2N`` lifted vortex centers with degrees ``+-1`` summing to zero.

    Positive vortices come first. Use :meth:`from_points` to build one
    from an unsorted list of ``(x, y, d)`` triples.
    """

    positions: np.ndarray
    degrees: np.ndarray
    geometry: TorusGeometry = UNIT_TORUS

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float).reshape(-1, 2)
        deg = np.array(self.degrees, dtype=int).reshape(-1)
        if pos.shape[0] != deg.shape[0]:
            raise ValueError("positions and degrees differ in length")
        if pos.shape[0] < 2 or pos.shape[0] % 2:
            raise ValueError("need an even, positive number of vortices")
        if not np.all(np.abs(deg) == 1):
            raise ValueError("degrees must be +1 or -1")
        if deg.sum() != 0:
            raise ValueError("degrees must sum to zero")
        n = deg.shape[0] // 2
        if not (np.all(deg[:n] == 1) and np.all(deg[n:] == -1)):
            raise ValueError("positive vortices must precede negative ones (use from_points)")
        if not np.all(np.isfinite(pos)):
            raise ValueError("non-finite vortex position")
        pos.setflags(write=False)
        deg.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "degrees", deg)

    @classmethod
    def from_points(cls, points, geometry: TorusGeometry = UNIT_TORUS) -> "VortexConfiguration":
        pts = [tuple(p) for p in points]
        plus = [p[:2] for p in pts if int(p[2]) == 1]
        minus = [p[:2] for p in pts if int(p[2]) == -1]
        if len(plus) + len(minus) != len(pts):
            raise ValueError("degrees must be +1 or -1")
        return cls(np.array(plus + minus, dtype=float), [1] * len(plus) + [-1] * len(minus), geometry)

    @property
    def N(self) -> int:
        return self.degrees.shape[0] // 2

    def __len__(self):
        return self.degrees.shape[0]

    def with_positions(self, positions) -> "VortexConfiguration":
        return VortexConfiguration(positions, self.degrees, self.geometry)

    def translated(self, c) -> "VortexConfiguration":
        return self.with_positions(self.positions + np.asarray(c, dtype=float))

    def pair_distances(self) -> np.ndarray:
        """Torus distances of all pairs ``j < k``."""
        i, k = np.triu_indices(len(self), 1)
        return self.geometry.distance(self.positions[i], self.positions[k])

    def min_distance(self) -> float:
        return float(self.pair_distances().min())

    def closest_pair(self):
        i, k = np.triu_indices(len(self), 1)
        d = self.geometry.distance(self.positions[i], self.positions[k])
        m = int(np.argmin(d))
        return int(i[m]), int(k[m])

    def wrapped(self) -> np.ndarray:
        return self.geometry.wrap(self.positions)

    def to_points(self):
        return [(float(x), float(y), int(d)) for (x, y), d in zip(self.positions, self.degrees)]


@dataclass(frozen=True)
class CoreConstant:
    """Core-energy constant ``gamma`` and the ladder it was extrapolated from."""

    gamma: float
    epsilon_ladder: tuple = ()
    extrapolated: bool = False

    def __post_init__(self):
        if not math.isfinite(self.gamma):
            raise ValueError("gamma must be finite")


def _check_separated(a: VortexConfiguration):
    if a.min_distance() < COLLISION_TOL:
        raise CollidedConfiguration(f"vortices {a.closest_pair()} coincide")


def charge_sum(a: VortexConfiguration) -> np.ndarray:
    """``sum_m d_m a_m`` on the lifted coordinates."""
    return a.degrees @ a.positions


def q_of(a: VortexConfiguration) -> np.ndarray:
    return apply_J(charge_sum(a))


def Q0_of(a: VortexConfiguration) -> np.ndarray:
    return 2.0 * math.pi * q_of(a)


def renormalized_W(a: VortexConfiguration) -> float:
    _check_separated(a)
    ev = evaluator_for(a.geometry)
    i, k = np.triu_indices(len(a), 1)
    d = a.positions[i] - a.positions[k]
    f = ev.F_values(d[:, 0], d[:, 1])
    # each unordered pair appears twice in the ordered double sum
    return float(-2.0 * math.pi * np.sum(a.degrees[i] * a.degrees[k] * f))


def renormalized_WT(a: VortexConfiguration) -> float:
    s = charge_sum(a)
    return renormalized_W(a) + 2.0 * math.pi ** 2 / a.geometry.area * float(s @ s)


def WT_eps(a: VortexConfiguration, eps: float, gamma) -> float:
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    g = gamma.gamma if isinstance(gamma, CoreConstant) else float(gamma)
    return 2 * a.N * (math.pi * math.log(1.0 / eps) + g) + renormalized_WT(a)


def interaction_sums(a: VortexConfiguration) -> np.ndarray:
    """Rows ``sum_{k != j} d_k grad F(a_j - a_k)``; raises on collisions."""
    ev = evaluator_for(a.geometry)
    s, dmin = ev.pair_gradient_sums(a.positions, a.degrees.astype(float))
    if dmin < COLLISION_TOL:
        raise CollidedConfiguration(f"vortices {a.closest_pair()} coincide")
    return s


def grad_WT_all(a: VortexConfiguration) -> np.ndarray:
    """Gradient of ``W_T`` with respect to every vortex, shape ``(2N, 2)``."""
    s = interaction_sums(a)
    d = a.degrees[:, None].astype(float)
    jq = apply_J(q_of(a))
    return -2.0 * math.pi * d * s - 4.0 * math.pi ** 2 / a.geometry.area * d * jq[None, :]


def grad_WT(a: VortexConfiguration, j: int) -> np.ndarray:
    return grad_WT_all(a)[j]


def grad_W_all(a: VortexConfiguration) -> np.ndarray:
    """Gradient of the momentum-free ``W`` alone."""
    return -2.0 * math.pi * a.degrees[:, None] * interaction_sums(a)


def xi_of(a: VortexConfiguration) -> float:
    """``1/4 sum_{j != k} d_j d_k |a_j - a_k|^2`` on lifted coordinates."""
    i, k = np.triu_indices(len(a), 1)
    d = a.positions[i] - a.positions[k]
    return float(0.5 * np.sum(a.degrees[i] * a.degrees[k] * np.sum(d * d, axis=1)))


def summary(a: VortexConfiguration) -> dict:
    """JSON-ready dictionary of the configuration's invariants."""
    return {
        "W": renormalized_W(a),
        "W_T": renormalized_WT(a),
        "q": q_of(a).tolist(),
        "xi": xi_of(a),
        "Q0": Q0_of(a).tolist(),
    }
