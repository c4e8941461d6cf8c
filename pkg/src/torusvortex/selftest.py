"""Fast end-to-end consistency checks behind ``torusvortex selftest``."""
from __future__ import annotations

import math

import numpy as np


def _check(results, name, value, limit):
    results[name] = {"value": float(value), "limit": float(limit), "passed": bool(value <= limit)}


def run_selftest() -> dict:
    from ._backend import BACKEND, _kernels_py, kernels
    from .core import solve_profile
    from .field import harmonic_map, plane_wave, plaquette_winding
    from .green import GreenEvaluator, TorusGeometry
    from .nlse import NlseParams, step
    from .rdl import IntegratorParams, analytic_dipole, integrate
    from .renorm import VortexConfiguration

    res = {}
    ev = GreenEvaluator()
    lap = ev.laplacian_check((0.37, 0.22))
    _check(res, "green_laplacian_rel", abs(lap / (-2 * math.pi) - 1.0), 1e-5)
    ev2 = GreenEvaluator(TorusGeometry(2.0, 1.0))
    _check(res, "green_laplacian_2x1_rel", abs(ev2.laplacian_check((0.9, 0.3)) / (-math.pi) - 1.0), 1e-5)
    _check(res, "green_symmetry", abs(ev.eval_F((0.3, 0.1)) - ev.eval_F((0.1, 0.3))), 1e-12)
    x = np.array([0.13, 0.31, -0.4])
    y = np.array([0.27, -0.05, 0.45])
    diff = np.max(np.abs(kernels.green_eval(x, y, 1.0, 1.0, 12) - _kernels_py.green_eval(x, y, 1.0, 1.0, 12)))
    _check(res, f"backend_{BACKEND}_matches_python", diff, 1e-13)

    a = VortexConfiguration([(0.5, 0.4), (0.5, 0.6)], [1, -1])
    traj = integrate(a, params=IntegratorParams(dt=1e-4, t_end=0.01))
    ref = np.array([analytic_dipole(a, t=t).positions for t in traj.times])
    _check(res, "dipole_line", np.max(np.abs(traj.positions - ref)), 1e-8)

    H = harmonic_map(a, 64)
    _check(res, "harmonic_modulus", np.max(np.abs(np.abs(H.samples) - 1.0)), 1e-12)
    w = plaquette_winding(H)
    _check(res, "harmonic_winding", abs(int(w.sum())) + abs(int(np.abs(w).sum()) - 2), 0)

    u = plane_wave(TorusGeometry(), 32, (2, -1), eps=0.1)
    p = NlseParams(eps=0.1, dt=1e-3, t_end=1e-3)
    v = step(u, p)
    X, Y = u.nodes()
    k = 2 * math.pi * np.array([2, -1])
    exact = np.exp(1j * (k[0] * X + k[1] * Y + (k @ k) * 1e-3))
    _check(res, "nlse_plane_wave", np.max(np.abs(v.samples - exact)), 1e-10)

    prof = solve_profile(0.1, 512)
    _check(res, "core_residual", prof.residual, 1e-10)
    _check(res, "core_monotone", float(np.sum(np.diff(prof.values) < 0)), 0)
    return res
