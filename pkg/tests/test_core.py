"""Optimal radial core profile and the core constant gamma."""
import math

import numpy as np
import pytest

from torusvortex.core import (
    default_gamma, estimate_gamma, polar_energy, richardson_zero, solve_profile, tanh_profile,
)
from torusvortex.renorm import CoreConstant, WT_eps
from torusvortex import scenarios

LADDER = (0.1, 0.05, 0.025, 0.0125)


@pytest.fixture(scope="module")
def profiles():
    return {e: solve_profile(e, 1024) for e in LADDER}


def test_profile_shape(profiles):
    for p in profiles.values():
        assert p.values[0] == 0.0 and p.values[-1] == 1.0
        assert p.radii[0] == 0.0 and p.radii[-1] == 1.0
        assert np.all(np.diff(p.values) >= 0.0)
        assert np.all((p.values >= 0.0) & (p.values <= 1.0))
        assert p.residual <= 1e-10
        assert p.energy >= math.pi * math.log(1.0 / p.eps)


def test_linear_near_origin(profiles):
    for p in profiles.values():
        c1 = p.values[1] / p.radii[1]
        c2 = p.values[2] / p.radii[2]
        assert c1 > 0 and abs(c2 / c1 - 1.0) <= 0.05


def test_excess_is_cauchy(profiles):
    ex = [profiles[e].excess for e in LADDER]
    gaps = np.abs(np.diff(ex))
    assert np.all(gaps[1:] <= 0.5 * gaps[:-1])


def test_grid_independence():
    for eps in (0.1, 0.025):
        assert abs(solve_profile(eps, 1024).energy - solve_profile(eps, 2048).energy) <= 1e-6


def test_polar_quadrature_agrees(profiles):
    for p in profiles.values():
        assert abs(polar_energy(p) / p.energy - 1.0) <= 1e-5


def test_profile_call_in_core_units(profiles):
    p = profiles[0.05]
    assert p(0.0) == 0.0 and p(1.0 / 0.05) == 1.0 and p(1e3) == 1.0
    assert 0.5 < float(p(1.5)) < 0.9
    assert tanh_profile(0.0) == 0.0


def test_solve_profile_bounds():
    with pytest.raises(ValueError):
        solve_profile(0.6)
    with pytest.raises(ValueError):
        solve_profile(1e-4)
    with pytest.raises(ValueError):
        solve_profile(0.1, nodes=256)


def test_richardson_zero_is_exact_for_quadratics():
    eps = np.array([0.1, 0.05, 0.025])
    assert richardson_zero(eps, 2.0 + 3.0 * eps ** 2 - eps ** 4) == pytest.approx(2.0, abs=1e-12)


def test_gamma_self_consistency():
    g1, d1 = estimate_gamma((0.1, 0.05, 0.025))
    g2, d2 = estimate_gamma((0.05, 0.025, 0.0125))
    assert abs(g1.gamma - g2.gamma) <= 1e-3
    assert max(d1["residuals"] + d2["residuals"]) <= 1e-10
    assert set(d1) >= {"gamma", "ladder", "I_values", "residuals"}


def test_derived_gamma_golden():
    g = default_gamma()
    assert g.gamma > 0
    assert g.gamma == pytest.approx(1.1965743930963848, abs=1e-9)
    assert g.epsilon_ladder == LADDER and g.extrapolated


def test_gamma_cache_matches_fresh_solve():
    cached, info = estimate_gamma((0.1, 0.05, 0.025), use_cache=True)
    fresh, _ = estimate_gamma((0.1, 0.05, 0.025))
    assert info["cached"] and abs(cached.gamma - fresh.gamma) <= 1e-12


def test_ladder_validation():
    with pytest.raises(ValueError):
        estimate_gamma((0.1, 0.05))
    with pytest.raises(ValueError):
        estimate_gamma((0.05, 0.1, 0.025))


def test_gamma_enters_linearly():
    a = scenarios.get("fig4_middle").configuration()
    d = WT_eps(a, 0.05, CoreConstant(1.0 + 0.3)) - WT_eps(a, 0.05, CoreConstant(1.0))
    assert d == pytest.approx(2 * a.N * 0.3, abs=1e-12)
