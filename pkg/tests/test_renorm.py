"""Renormalized energies, gradients and first integrals of a vortex configuration."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from torusvortex import scenarios
from torusvortex.errors import CollidedConfiguration
from torusvortex.green import TorusGeometry
from torusvortex.renorm import (
    CoreConstant, VortexConfiguration, Q0_of, WT_eps, apply_J, evaluator_for, grad_W_all, grad_WT,
    grad_WT_all, interaction_sums, q_of, renormalized_W, renormalized_WT, summary, xi_of,
)
from torusvortex.rdl import symmetric_configuration

from _util import random_configuration

PI = math.pi


def fig(name):
    return scenarios.get(name).configuration()


def test_apply_J():
    assert np.array_equal(apply_J([1.0, 2.0]), [2.0, -1.0])
    v = np.array([0.3, -0.7])
    assert np.array_equal(apply_J(apply_J(v)), -v)


def test_configuration_validation():
    with pytest.raises(ValueError):
        VortexConfiguration([(0.1, 0.1), (0.2, 0.2)], [1, 1])
    with pytest.raises(ValueError):
        VortexConfiguration([(0.1, 0.1), (0.2, 0.2)], [-1, 1])
    with pytest.raises(ValueError):
        VortexConfiguration([(0.1, 0.1), (0.2, 0.2)], [2, -2])
    with pytest.raises(ValueError):
        VortexConfiguration([(0.1, 0.1)], [1])
    a = VortexConfiguration.from_points([(0.1, 0.1, -1), (0.2, 0.2, 1)])
    assert a.degrees.tolist() == [1, -1] and a.positions[0].tolist() == [0.2, 0.2]
    with pytest.raises(ValueError):
        a.positions[0, 0] = 3.0


@pytest.mark.parametrize("name, q0", [
    ("fig3_left", (-0.4, 0.0)), ("fig3_middle", (-0.4, 0.4)), ("fig3_right", (-0.4, -0.4)),
])
def test_caption_momenta(name, q0):
    assert np.allclose(Q0_of(fig(name)), PI * np.array(q0), atol=1e-15, rtol=0)


def test_q_examples():
    a = fig("fig3_left")
    assert np.allclose(q_of(a), [-0.2, 0.0], atol=1e-15)
    assert np.allclose(q_of(fig("fig4_left")), 0.0, atol=1e-15)
    assert np.allclose(q_of(symmetric_configuration("diag4", 0.13, -0.07)), 0.0, atol=1e-15)
    assert np.allclose(q_of(a.translated((0.37, -1.2))), q_of(a), atol=1e-14)
    assert np.allclose(Q0_of(fig("fig4_middle")), 0.0, atol=1e-15)


def test_dipole_energy_expansions(unit):
    a = fig("fig3_left")
    assert renormalized_W(a) == pytest.approx(2 * PI * unit.eval_F((0.0, -0.2)), abs=1e-13)
    assert renormalized_WT(a) == pytest.approx(2 * PI * unit.eval_F((0.0, -0.2)) + 2 * PI ** 2 * 0.04, abs=1e-13)
    assert xi_of(a) == pytest.approx(-0.5 * 0.04, abs=1e-16)


def test_derived_golden_values():
    assert renormalized_W(fig("fig4_left")) == pytest.approx(0.0, abs=1e-12)
    assert renormalized_W(fig("fig4_middle")) == pytest.approx(-8.206122855841489, abs=1e-11)
    assert xi_of(fig("fig4_middle")) == pytest.approx(0.0, abs=1e-15)
    assert renormalized_WT(fig("fig3_left")) == pytest.approx(-1.4912196682958152, abs=1e-12)
    assert renormalized_WT(fig("fig4_right")) == pytest.approx(32.39541283959505, abs=1e-11)
    assert xi_of(fig("fig4_right")) == pytest.approx(-0.5, abs=1e-14)


def test_derived_WT_eps_golden():
    g = CoreConstant(1.1965743930963848, (0.1, 0.05, 0.025, 0.0125), True)
    assert WT_eps(fig("fig3_left"), 0.05, g) == pytest.approx(19.724670123335084, abs=1e-10)


def test_WT_eps_structure():
    a = fig("fig3_middle")
    g = CoreConstant(1.2)
    diff = WT_eps(a, 0.05, g) - renormalized_WT(a)
    assert diff == pytest.approx(2 * (PI * math.log(20.0) + 1.2), abs=1e-12)
    assert WT_eps(a, 0.025, g) - WT_eps(a, 0.05, g) == pytest.approx(2 * PI * math.log(2.0), abs=1e-12)
    assert WT_eps(a, 0.05, 1.2 + 0.01) - WT_eps(a, 0.05, 1.2) == pytest.approx(0.02, abs=1e-12)
    with pytest.raises(ValueError):
        WT_eps(a, 1.5, g)
    with pytest.raises(ValueError):
        CoreConstant(float("nan"))


def test_WT_equals_W_without_charge_sum():
    a = fig("fig4_middle")
    assert renormalized_WT(a) == renormalized_W(a)


def test_collision_guard():
    a = VortexConfiguration([(0.3, 0.3), (1.3, 0.3)], [1, -1])
    with pytest.raises(CollidedConfiguration):
        renormalized_W(a)
    with pytest.raises(CollidedConfiguration):
        grad_WT_all(a)


def _fd_gradient(a, h=1e-5):
    out = np.zeros((len(a), 2))
    for j in range(len(a)):
        for c in range(2):
            e = np.zeros((len(a), 2))
            e[j, c] = h
            out[j, c] = (renormalized_WT(a.with_positions(a.positions + e))
                         - renormalized_WT(a.with_positions(a.positions - e))) / (2 * h)
    return out


@pytest.mark.parametrize("lw", [(1.0, 1.0), (2.0, 1.0)])
def test_gradient_matches_finite_differences(rng, lw):
    g = TorusGeometry(*lw)
    for trial in range(20):
        a = random_configuration(rng, 1 + trial % 3, g, dmin=0.1)
        an = grad_WT_all(a)
        fd = _fd_gradient(a)
        scale = np.max(np.abs(an))
        assert np.max(np.abs(an - fd)) <= 1e-6 * scale


def test_gradient_sums_to_zero(rng):
    a = random_configuration(rng, 3)
    assert np.max(np.abs(grad_WT_all(a).sum(axis=0))) <= 1e-11


def test_dipole_gradient_composition(unit):
    a = fig("fig3_left")
    q = q_of(a)
    expected = -2 * PI * (-1) * unit.eval_gradF((0.0, -0.2)) - 4 * PI ** 2 * apply_J(q)
    assert np.allclose(grad_WT(a, 0), expected, atol=1e-12)
    # both formulas vanish together because the dipole is aligned with its charge sum
    assert np.allclose(grad_WT(a, 0), _fd_gradient(a)[0], rtol=1e-6, atol=1e-8)


def test_identity_of_forms(rng):
    for _ in range(10):
        a = random_configuration(rng, 2)
        s = interaction_sums(a)
        q = q_of(a)
        for j in range(len(a)):
            lhs = -(a.degrees[j] / PI) * apply_J(grad_WT(a, j))
            rhs = 2 * apply_J(s[j]) - 4 * PI * q
            assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))


def test_grad_W_matches_fd_of_W(rng):
    a = random_configuration(rng, 2)
    h = 1e-5
    e = np.zeros((4, 2))
    e[2, 1] = h
    fd = (renormalized_W(a.with_positions(a.positions + e)) - renormalized_W(a.with_positions(a.positions - e))) / (2 * h)
    assert grad_W_all(a)[2, 1] == pytest.approx(fd, rel=1e-6)


def test_permutation_equivariance(rng):
    a = random_configuration(rng, 3)
    perm = [2, 0, 1, 4, 5, 3]
    b = a.with_positions(a.positions[perm])
    for f in (renormalized_W, renormalized_WT, xi_of):
        assert f(b) == pytest.approx(f(a), abs=1e-12)
    assert np.allclose(q_of(b), q_of(a), atol=1e-15)
    assert np.allclose(grad_WT_all(b), grad_WT_all(a)[perm], atol=1e-11)


@settings(max_examples=40, deadline=None)
@given(cx=st.floats(-3, 3), cy=st.floats(-3, 3), seed=st.integers(0, 10 ** 6))
def test_translation_invariance(cx, cy, seed):
    a = random_configuration(np.random.default_rng(seed), 2)
    b = a.translated((cx, cy))
    assert renormalized_W(b) == pytest.approx(renormalized_W(a), abs=1e-10)
    assert renormalized_WT(b) == pytest.approx(renormalized_WT(a), abs=1e-10)
    assert xi_of(b) == pytest.approx(xi_of(a), abs=1e-12)
    assert np.allclose(q_of(b), q_of(a), atol=1e-12)


def test_xi_quadratic_identity(rng):
    # under sum d = 0 the pair form reduces to -(1/2)|sum d a|^2
    for _ in range(10):
        a = random_configuration(rng, int(rng.integers(1, 4)))
        s = a.degrees @ a.positions
        assert xi_of(a) == pytest.approx(-0.5 * float(s @ s), abs=1e-12)
        assert xi_of(a) != pytest.approx(-0.25 * float(s @ s), abs=1e-6)


def test_summary_keys():
    s = summary(fig("fig3_left"))
    assert {"W", "W_T", "q", "xi", "Q0"} <= set(s)


def test_evaluator_cache():
    assert evaluator_for(TorusGeometry(2.0, 1.0)) is evaluator_for(TorusGeometry(2.0, 1.0))
