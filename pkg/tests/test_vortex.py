"""Plaquette detection and nearest-neighbour tracking."""
import math

import numpy as np
import pytest

from torusvortex import scenarios
from torusvortex.errors import TrackingLost
from torusvortex.field import ComplexField, build_initial_data, grid_nodes, plane_wave
from torusvortex.green import TorusGeometry, UNIT_TORUS
from torusvortex.vortex import (
    VortexObservation, _bilinear_zero, default_max_jump, detect, jacobian_centroids, track,
)

from _util import random_configuration

FIG3L = scenarios.get("fig3_left").configuration()


def _nearest(obs, p, g=UNIT_TORUS):
    d = [float(g.distance(np.array(o.position), np.array(p))) for o in obs]
    k = int(np.argmin(d))
    return obs[k], d[k]


def test_synthetic_winding_field():
    x0, y0 = 0.3137, 0.4421
    X, Y = grid_nodes(UNIT_TORUS, 64)
    u = ComplexField(np.sin(2 * math.pi * (X - x0)) + 1j * np.sin(2 * math.pi * (Y - y0)))
    obs = detect(u)
    assert len(obs) == 4 and sum(o.degree for o in obs) == 0
    o, d = _nearest(obs, (x0, y0))
    assert o.degree == 1 and d <= 1.0 / 64
    o, d = _nearest(obs, (x0 + 0.5, y0))
    assert o.degree == -1 and d <= 1.0 / 64


def test_vortex_free_field():
    assert detect(plane_wave(TorusGeometry(2.0, 1.0), (64, 32), (2, 1))) == []


def test_initial_data_detection():
    u = build_initial_data(FIG3L, 0.025, 256)
    obs = detect(u)
    assert sorted(o.degree for o in obs) == [-1, 1]
    for p, d in zip(FIG3L.positions, FIG3L.degrees):
        o, dist = _nearest(obs, p)
        assert o.degree == d and dist <= 1.0 / 256
        assert 0.0 <= o.position[0] < 1.0 and 0.0 <= o.position[1] < 1.0


def test_random_configurations_detection_within_a_cell(rng):
    M = 128
    h = 1.0 / M
    for trial in range(50):
        a = random_configuration(rng, 1 + trial % 2, dmin=0.2)
        u = build_initial_data(a, 4 * h, M)
        obs = detect(u)
        assert len(obs) == len(a) and sum(o.degree for o in obs) == 0
        for p, d in zip(a.positions, a.degrees):
            o, dist = _nearest(obs, p)
            assert o.degree == d and dist <= h


def test_bilinear_zero_exact_for_affine_fields():
    s0, t0 = 0.3, 0.8
    f = lambda s, t: (s - s0) + 2j * (t - t0) + 0.5 * (t - t0)
    s, t = _bilinear_zero(f(0, 0), f(1, 0), f(0, 1), f(1, 1))
    assert (s, t) == (pytest.approx(s0, abs=1e-12), pytest.approx(t0, abs=1e-12))


def test_jacobian_centroid_cross_check():
    u = build_initial_data(FIG3L, 0.025, 256)
    cents = jacobian_centroids(u, FIG3L.positions, 0.08)
    for c, p in zip(cents, FIG3L.positions):
        assert float(UNIT_TORUS.distance(np.array(c), p)) <= 2.0 / 256


def _moving_snapshots(a0, velocity, times, M=128, eps=None):
    eps = eps or 4.0 / M
    out = []
    for t in times:
        a = a0.with_positions(a0.positions + np.asarray(velocity) * t)
        u = build_initial_data(a, eps, M).replace(time=t)
        out.append(detect(u))
    return out


def test_stationary_paths():
    u = build_initial_data(FIG3L, 0.05, 128)
    snaps = [[VortexObservation(o.position, o.degree, t, o.quality) for o in detect(u)] for t in (0, 1, 2)]
    paths = track(snaps, FIG3L, max_jump=0.01)
    assert paths.status == "tracked"
    assert np.max(np.abs(paths.positions - paths.positions[0])) == 0.0
    assert paths.max_speed() == 0.0


def test_tracking_through_the_seam_with_lifts():
    a0 = scenarios.get("fig3_middle").configuration()
    v = np.array([3.0, -2.0])
    times = np.linspace(0.0, 0.3, 16)
    snaps = _moving_snapshots(a0, v, times)
    # shuffle detection order so identity is not inherited from list order
    snaps = [list(reversed(s)) for s in snaps]
    paths = track(snaps, a0, max_jump=default_max_jump(1 / 128, 0.02))
    assert paths.status == "tracked"
    exact = a0.positions[None] + v[None, None, :] * times[:, None, None]
    assert np.max(np.abs(paths.positions - exact)) <= 1.0 / 128
    assert np.allclose(paths.velocities(), v, atol=0.02)
    assert np.array_equal(paths.degrees, a0.degrees)


def test_identity_kept_for_close_crossing_vortices():
    # two same-sign vortices pass each other at separation 0.1; steps are small
    from torusvortex.renorm import VortexConfiguration

    a0 = VortexConfiguration([(0.2, 0.45), (0.8, 0.55), (0.2, 0.05), (0.8, 0.95)], [1, 1, -1, -1])
    vel = np.array([[2.0, 0.0], [-2.0, 0.0], [2.0, 0.0], [-2.0, 0.0]])
    times = np.linspace(0.0, 0.3, 31)
    snaps = []
    for t in times:
        a = a0.with_positions(a0.positions + vel * t)
        snaps.append(detect(build_initial_data(a, 4.0 / 128, 128).replace(time=t)))
    paths = track(snaps, a0, max_jump=0.04)
    exact = a0.positions[None] + vel[None] * times[:, None, None]
    assert np.max(np.abs(paths.positions - exact)) <= 1.0 / 128


def test_degree_mismatch_loses_track():
    obs = [VortexObservation((0.5, 0.41), -1, 0.1, 0.0), VortexObservation((0.5, 0.59), 1, 0.1, 0.0)]
    with pytest.raises(TrackingLost) as exc:
        track([obs], FIG3L, max_jump=0.05)
    assert exc.value.t == 0.1


def test_missing_vortex_and_truncation():
    u = build_initial_data(FIG3L, 0.05, 128)
    first = detect(u)
    with pytest.raises(TrackingLost):
        track([first, []], FIG3L, max_jump=0.05)
    paths = track([first, first[:1]], FIG3L, max_jump=0.05, raise_on_loss=False)
    assert paths.status == "lost" and len(paths.times) == 1 and paths.positions.shape == (1, 2, 2)


def test_default_max_jump():
    assert default_max_jump(0.01, 0.001) == pytest.approx(0.07)
