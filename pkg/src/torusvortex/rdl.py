"""Reduced dynamical law: velocities, fixed-step RK4, closed-form and symmetric solutions.

The law on the ``l x w`` torus reads

    da_j/dt = 2 J sum_{k != j} d_k grad F(a_j - a_k) - (2 / (l w)) Q0

which on the unit torus with ``Q0 = Q0_of(a(0))`` coincides with
``-(d_j / pi) J grad_{a_j} W_T``. Positions are evolved as continuous lifts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CollidedConfiguration, SingularArgument, StepExploded, WrongArity
from .green import GreenEvaluator, UNIT_TORUS
from .renorm import (
    COLLISION_TOL,
    VortexConfiguration,
    Q0_of,
    apply_J,
    evaluator_for,
    q_of,
    renormalized_WT,
    xi_of,
)

MAX_SPEED = 1e6


@dataclass(frozen=True)
class IntegratorParams:
    dt: float = 1e-4
    t_end: float = 0.1
    stop_dist: float = 1e-3
    record_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.stop_dist > 0:
            raise ValueError("stop_dist must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass
class ReducedTrajectory:
    """Recorded states of one integration.

    ``positions`` has shape ``(n_records, 2N, 2)`` (lifted coordinates).
    ``status`` is ``"completed"`` or ``"collided"``; for a collision
    ``collision`` holds ``(t, (j, k))`` at step resolution.
    """

    times: np.ndarray
    positions: np.ndarray
    q: np.ndarray
    WT: np.ndarray
    xi: np.ndarray
    min_dist: np.ndarray
    degrees: np.ndarray
    geometry: object
    Q0: np.ndarray
    params: IntegratorParams
    status: str = "completed"
    collision: tuple | None = None
    _pre_collision: tuple | None = field(default=None, repr=False)

    @property
    def states(self):
        return [VortexConfiguration(p, self.degrees, self.geometry) for p in self.positions]

    def state(self, i: int) -> VortexConfiguration:
        return VortexConfiguration(self.positions[i], self.degrees, self.geometry)

    def integral_drift(self) -> dict:
        """Maximum deviation of each first integral from its initial value.

        The energy drift is relative to ``max(|W_T(0)|, 1)``; symmetric
        configurations can have ``W_T`` identically zero.
        """
        wt0 = self.WT[0]
        return {
            "q": float(np.max(np.abs(self.q - self.q[0]))),
            "WT_rel": float(np.max(np.abs(self.WT - wt0)) / max(abs(wt0), 1.0)),
            "xi": float(np.max(np.abs(self.xi - self.xi[0]))),
        }


def _velocities(pos, deg, ev: GreenEvaluator, drift):
    s, dmin = ev.pair_gradient_sums(pos, deg)
    if dmin < COLLISION_TOL:
        raise CollidedConfiguration("vortices coincide")
    v = 2.0 * apply_J(s) - drift[None, :]
    if not np.all(np.isfinite(v)) or np.max(np.abs(v)) > MAX_SPEED:
        raise StepExploded(f"vortex speed {np.max(np.abs(v)):.3g} exceeds {MAX_SPEED:g}")
    return v


def momentum_drift(Q0, geometry) -> np.ndarray:
    return 2.0 / geometry.area * np.asarray(Q0, dtype=float)


def rhs(a: VortexConfiguration, Q0=None) -> np.ndarray:
    """Velocities of all vortices, shape ``(2N, 2)``; ``Q0`` defaults to ``Q0_of(a)``."""
    Q0 = Q0_of(a) if Q0 is None else np.asarray(Q0, dtype=float)
    ev = evaluator_for(a.geometry)
    return _velocities(a.positions, a.degrees.astype(float), ev, momentum_drift(Q0, a.geometry))


def rhs_alternate(a: VortexConfiguration) -> np.ndarray:
    """The momentum-free-looking form ``2 J sum d_k grad F - 4 pi q(a) / (l w)``."""
    ev = evaluator_for(a.geometry)
    s, _ = ev.pair_gradient_sums(a.positions, a.degrees.astype(float))
    return 2.0 * apply_J(s) - 4.0 * math.pi / a.geometry.area * q_of(a)[None, :]


def _rk4_step(pos, dt, f):
    k1 = f(pos)
    k2 = f(pos + 0.5 * dt * k1)
    k3 = f(pos + 0.5 * dt * k2)
    k4 = f(pos + dt * k3)
    return pos + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4(f, y0, dt: float, nsteps: int, record_every: int = 1):
    """Generic fixed-step RK4 returning the recorded states (including ``y0``)."""
    y = np.array(y0, dtype=float)
    out = [y.copy()]
    for n in range(1, nsteps + 1):
        y = _rk4_step(y, dt, f)
        if n % record_every == 0 or n == nsteps:
            out.append(y.copy())
    return np.array(out)


def _min_dist(pos, geometry) -> float:
    i, k = np.triu_indices(pos.shape[0], 1)
    return float(geometry.distance(pos[i], pos[k]).min())


def integrate(a0: VortexConfiguration, Q0=None, params: IntegratorParams | None = None) -> ReducedTrajectory:
    """Classical RK4 with fixed ``dt``; stops when two vortices come within ``stop_dist``."""
    params = params or IntegratorParams()
    Q0 = Q0_of(a0) if Q0 is None else np.asarray(Q0, dtype=float)
    geometry = a0.geometry
    ev = evaluator_for(geometry)
    deg = a0.degrees.astype(float)
    drift = momentum_drift(Q0, geometry)

    def f(p):
        return _velocities(p, deg, ev, drift)

    nsteps = int(round(params.t_end / params.dt))
    times, states = [0.0], [a0.positions.copy()]
    status, collision, pre = "completed", None, None
    pos = a0.positions.copy()
    if _min_dist(pos, geometry) <= params.stop_dist:
        status = "collided"
        collision = (0.0, a0.closest_pair())
    else:
        for n in range(1, nsteps + 1):
            prev = pos
            pos = _rk4_step(pos, params.dt, f)
            t = n * params.dt
            if _min_dist(pos, geometry) <= params.stop_dist:
                times.append(t)
                states.append(pos.copy())
                status = "collided"
                collision = (t, VortexConfiguration(pos, a0.degrees, geometry).closest_pair())
                pre = ((n - 1) * params.dt, prev)
                break
            if n % params.record_every == 0 or n == nsteps:
                times.append(t)
                states.append(pos.copy())
    positions = np.array(states)
    configs = [VortexConfiguration(p, a0.degrees, geometry) for p in positions]
    return ReducedTrajectory(
        times=np.array(times),
        positions=positions,
        q=np.array([q_of(c) for c in configs]),
        WT=np.array([renormalized_WT(c) for c in configs]),
        xi=np.array([xi_of(c) for c in configs]),
        min_dist=np.array([c.min_distance() for c in configs]),
        degrees=np.array(a0.degrees),
        geometry=geometry,
        Q0=Q0,
        params=params,
        status=status,
        collision=collision,
        _pre_collision=pre,
    )


def collision_time(traj: ReducedTrajectory, tol: float | None = None):
    """Time at which the minimum distance first reaches ``stop_dist``, or ``None``.

    The crossing is bracketed by the last two RK4 steps and refined by
    bisection on the length of a single RK4 sub-step from the earlier state.
    """
    if traj.status != "collided":
        return None
    t_hit = traj.collision[0]
    if traj._pre_collision is None:
        return t_hit
    t0, pos0 = traj._pre_collision
    ev = evaluator_for(traj.geometry)
    deg = traj.degrees.astype(float)
    drift = momentum_drift(traj.Q0, traj.geometry)
    stop = traj.params.stop_dist

    def gap(tau):
        p = _rk4_step(pos0, tau, lambda x: _velocities(x, deg, ev, drift))
        return _min_dist(p, traj.geometry) - stop

    lo, hi = 0.0, t_hit - t0
    tol = traj.params.dt * 1e-6 if tol is None else tol
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return t0 + hi


def dipole_velocity(a0: VortexConfiguration, Q0=None) -> np.ndarray:
    """Common velocity ``p`` of both vortices of a dipole."""
    if a0.N != 1:
        raise WrongArity(f"dipole solution needs N = 1, got N = {a0.N}")
    Q0 = Q0_of(a0) if Q0 is None else np.asarray(Q0, dtype=float)
    g = evaluator_for(a0.geometry).eval_gradF(a0.positions[0] - a0.positions[1])
    return -2.0 * apply_J(g) - momentum_drift(Q0, a0.geometry)


def analytic_dipole(a0: VortexConfiguration, Q0=None, t: float = 0.0) -> VortexConfiguration:
    """Both vortices of a dipole translate rigidly with velocity ``p``."""
    p = dipole_velocity(a0, Q0)
    return a0.with_positions(a0.positions + p[None, :] * t)


# -- symmetric four-vortex reductions (unit torus) --------------------------

SYMMETRIC_KINDS = ("diag4", "mirror4", "stacked4")


def symmetric_configuration(kind: str, alpha: float, beta: float, x0: float = 0.0,
                            drift=None) -> VortexConfiguration:
    """Four-vortex configuration of the given symmetry class.

    ``drift`` is an additive shift applied to all four vortices (used for
    ``stacked4``, whose solution translates by ``-2 t Q0``).
    """
    off1 = np.array([alpha, beta])
    if kind == "diag4":
        c1 = c2 = np.array([0.5, 0.5])
        off2 = np.array([beta, alpha])
    elif kind == "mirror4":
        c1 = c2 = np.array([0.5, 0.5])
        off2 = np.array([alpha, -beta])
    elif kind == "stacked4":
        c1 = np.array([x0, 0.25])
        c2 = np.array([x0, 0.75])
        off2 = np.array([alpha, -beta])
    else:
        raise ValueError(f"unknown symmetric kind {kind!r}; expected one of {SYMMETRIC_KINDS}")
    pos = np.array([c1 + off1, c1 - off1, c2 + off2, c2 - off2])
    if drift is not None:
        pos = pos + np.asarray(drift, dtype=float)[None, :]
    return VortexConfiguration(pos, [1, 1, -1, -1], UNIT_TORUS)


def _guarded_grad(ev: GreenEvaluator, args):
    args = np.asarray(args, dtype=float)
    m = UNIT_TORUS.minimal_image(args)
    if np.min(np.hypot(m[:, 0], m[:, 1])) < COLLISION_TOL:
        raise SingularArgument("reduced system evaluated at a zero argument of F")
    return ev.grad_values(args[:, 0], args[:, 1])


def symmetric_rhs(kind: str, alpha: float, beta: float, x0: float = 0.0, evaluator=None) -> np.ndarray:
    """``(d alpha/dt, d beta/dt)`` of the reduced four-vortex systems."""
    ev = evaluator or evaluator_for(UNIT_TORUS)
    if kind == "diag4":
        gx, gy = _guarded_grad(ev, [(alpha - beta, beta - alpha), (2 * alpha, 2 * beta),
                                    (alpha + beta, alpha + beta)])
        da = 2.0 * (-gy[0] + gy[1] - gy[2])
        db = 2.0 * (gx[0] - gx[1] + gx[2])
    elif kind == "mirror4":
        gx, gy = _guarded_grad(ev, [(2 * alpha, 2 * beta), (0.0, 2 * beta), (2 * alpha, 0.0)])
        da = 2.0 * (gy[0] - gy[1])
        db = 2.0 * (-gx[0] + gx[2])
    elif kind == "stacked4":
        gx, gy = _guarded_grad(ev, [(2 * alpha, 2 * beta), (0.0, 2 * beta - 0.5), (2 * alpha, 0.5)])
        da = 2.0 * (gy[0] - gy[1])
        db = 2.0 * (-gx[0] + gx[2])
    else:
        raise ValueError(f"unknown symmetric kind {kind!r}; expected one of {SYMMETRIC_KINDS}")
    return np.array([da, db])


def integrate_symmetric(kind: str, alpha0: float, beta0: float, x0: float = 0.0,
                        dt: float = 1e-4, t_end: float = 0.05, record_every: int = 1):
    """RK4 on the reduced ``(alpha, beta)`` system; returns ``(times, ab)``."""
    ev = evaluator_for(UNIT_TORUS)
    nsteps = int(round(t_end / dt))
    ab = rk4(lambda y: symmetric_rhs(kind, y[0], y[1], x0, ev), [alpha0, beta0], dt, nsteps, record_every)
    steps = list(range(0, nsteps + 1, record_every))
    if steps[-1] != nsteps:
        steps.append(nsteps)
    return np.array(steps) * dt, ab


def reduced_offsets(kind: str, positions, t: float, Q0, x0: float = 0.0) -> np.ndarray:
    """Recover ``(alpha, beta)`` from the first vortex of a full state."""
    p = np.asarray(positions, dtype=float)[0]
    if kind == "stacked4":
        return p - np.array([x0, 0.25]) + 2.0 * t * np.asarray(Q0, dtype=float)
    return p - np.array([0.5, 0.5])
