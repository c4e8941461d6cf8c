"""PDE-versus-ODE comparison: tracked NLSE vortices against the reduced law."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .core import solve_profile, tanh_profile
from .field import build_initial_data
from .nlse import NlseParams, run
from .rdl import IntegratorParams, analytic_dipole, dipole_velocity, integrate
from .renorm import VortexConfiguration, Q0_of
from .vortex import default_max_jump, detect, track

ODE_DT = 1e-4


@lru_cache(maxsize=1)
def reference_profile():
    """Optimal core profile at a small core size, reused for every eps by rescaling."""
    return solve_profile(0.005, 4096)


@dataclass
class LadderEntry:
    eps: float
    grid: int
    dt: float
    err: float
    status: str
    lost_time: float | None
    times: np.ndarray = field(repr=False)
    tracked: np.ndarray = field(repr=False)
    reference: np.ndarray = field(repr=False)
    velocities: np.ndarray = field(repr=False)
    run_report: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "eps": self.eps,
            "grid": self.grid,
            "dt": self.dt,
            "err": self.err,
            "status": self.status,
            "lost_time": self.lost_time,
            "snapshots": int(len(self.times)),
            "velocities": self.velocities.tolist(),
            "run": self.run_report,
        }


@dataclass
class ComparisonReport:
    entries: list
    reference: str
    p: list | None = None

    @property
    def errors(self):
        return [e.err for e in self.entries]

    @property
    def decreasing(self) -> bool:
        errs = self.errors
        return all(b < a for a, b in zip(errs, errs[1:]))

    def velocity_match(self, index: int = -1):
        """Angle (degrees) and magnitude ratio of each tracked velocity against ``p``."""
        if self.p is None:
            return None
        p = np.asarray(self.p)
        out = []
        for v in self.entries[index].velocities:
            ang = math.degrees(math.atan2(p[0] * v[1] - p[1] * v[0], float(p @ v)))
            out.append((ang, float(np.linalg.norm(v) / np.linalg.norm(p))))
        return out

    def as_dict(self) -> dict:
        return {
            "reference": self.reference,
            "errors": self.errors,
            "decreasing": self.decreasing,
            "p": self.p,
            "velocity_match": self.velocity_match() if self.p is not None else None,
            "entries": [e.as_dict() for e in self.entries],
        }


def _reference_path(a0, Q0, times, reference):
    if reference == "analytic":
        return np.array([analytic_dipole(a0, Q0, t).positions for t in times])
    n_snap = len(times) - 1
    interval = times[1] - times[0] if n_snap else 0.0
    if n_snap == 0:
        return a0.positions[None]
    sub = max(1, math.ceil(interval / ODE_DT - 1e-9))
    traj = integrate(a0, Q0, IntegratorParams(dt=interval / sub, t_end=times[-1], stop_dist=1e-3,
                                              record_every=sub))
    return traj.positions


def compare(a0: VortexConfiguration, eps_ladder, grids, t_end: float = 0.01, dt_factor: float = 0.02,
            snapshots: int = 40, reference: str = "integrate", profile="optimal", max_jump=None,
            Q0=None, workers: int = 1) -> ComparisonReport:
    """Track NLSE vortices for each ``(eps, grid)`` and measure the distance to the reduced law.

    The NLSE step is ``dt_factor * eps^2`` rounded so that ``snapshots``
    equally spaced snapshots hit ``t_end`` exactly. A lost track truncates
    that entry at the last good snapshot.
    """
    if len(eps_ladder) != len(grids):
        raise ValueError("eps_ladder and grids must have equal length")
    if reference == "analytic" and a0.N != 1:
        raise ValueError("the analytic reference needs a dipole")
    Q0 = Q0_of(a0) if Q0 is None else np.asarray(Q0, dtype=float)
    prof = reference_profile() if profile == "optimal" else tanh_profile
    g = a0.geometry
    entries = []
    for eps, M in zip(eps_ladder, grids):
        steps = math.ceil(t_end / (dt_factor * eps * eps))
        steps = snapshots * math.ceil(steps / snapshots)
        dt = t_end / steps
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            u0 = build_initial_data(a0, eps, M, prof)
        detections = []
        rep = run(u0, NlseParams(eps, dt, t_end, steps // snapshots, workers),
                  sink=lambda f, obs: detections.append(detect(f)))
        h = max(g.l, g.w) / M
        jump = max_jump if max_jump is not None else default_max_jump(h, t_end / snapshots)
        paths = track(detections, a0, jump, raise_on_loss=False)
        times = np.linspace(0.0, t_end, snapshots + 1)
        ref = _reference_path(a0, Q0, times, reference)
        n = min(len(paths.times), len(ref))
        if n:
            d = g.minimal_image(paths.positions[:n] - ref[:n])
            err = float(np.max(np.hypot(d[..., 0], d[..., 1])))
        else:
            err = math.inf
        entries.append(LadderEntry(float(eps), int(M), dt, err, paths.status, paths.lost_time,
                                   paths.times, paths.positions, ref[:n], paths.velocities(), rep.as_dict()))
    p = dipole_velocity(a0, Q0).tolist() if a0.N == 1 else None
    return ComparisonReport(entries, reference, p)
