import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lagglue.ambient import translator_residual
from lagglue.errors import AngleConditionViolated, NoIntersection, OutOfDomain
from lagglue.grim import (AffineMap, GrimChart, RigidMotionSpec, apply_motion, build_configuration, chart_eval,
                          gamma0, gudermannian, intersect, load_configuration, solve_s0)
from lagglue.ambient import KahlerBackground


def closed_form_s0(phi_m, lam):
    # log cos(s + phi) - log cos s = lam  <=>  tan s = (cos phi - e^lam) / sin phi
    return np.arctan((np.cos(phi_m) - np.exp(lam)) / np.sin(phi_m))


def test_curve_value_at_origin():
    assert gamma0(0.0) == pytest.approx(0.5j * np.pi)


def test_arclength_and_angle_charts_agree():
    s = np.linspace(-4, 4, 17)
    par = np.zeros((s.size, 3))
    par[:, 0], par[:, 2] = 0.3, s
    a = chart_eval(GrimChart(3, parametrization="arclength"), par)
    par_x = par.copy()
    par_x[:, 2] = gudermannian(s)
    b = chart_eval(GrimChart(3), par_x)
    assert np.allclose(a.point, b.point, atol=1e-12)
    # unit speed in arclength
    assert np.allclose(np.abs(a.jacobian[:, 2, 2]), 1.0)


def test_angle_chart_domain():
    with pytest.raises(OutOfDomain):
        chart_eval(GrimChart(3), np.array([0.0, 0.0, 2.0]))


@pytest.mark.parametrize("phi_m,lam", [(np.pi / 2, 1.0), (np.pi / 2, 0.0), (1.0, -2.0), (2.5, 0.7)])
def test_solve_s0_matches_closed_form(phi_m, lam):
    assert solve_s0(phi_m, lam) == pytest.approx(closed_form_s0(phi_m, lam), abs=1e-12)


def test_solve_s0_reference_value():
    assert solve_s0(np.pi / 2, 1.0) == pytest.approx(-np.arctan(np.e), abs=1e-13)
    with pytest.raises(NoIntersection):
        solve_s0(0.0, 0.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, np.pi - 0.05), st.floats(-3.0, 3.0))
def test_solve_s0_root_property(phi_m, lam):
    s = solve_s0(phi_m, lam)
    assert -np.pi / 2 < s < np.pi / 2 - phi_m
    assert abs(s - closed_form_s0(phi_m, lam)) < 1e-9


def test_intersection_point_lies_on_both_cylinders():
    spec = RigidMotionSpec((np.pi / 4, np.pi / 4, np.pi / 2), 0.5)
    rec = intersect(spec)
    x = np.zeros(3)
    x[-1] = rec.s1
    moved = chart_eval(GrimChart(3).moved(spec), x).point
    assert np.allclose(moved, rec.point, atol=1e-12)
    assert np.allclose(rec.cone_angles, np.sort(spec.phi), atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0.2, 1.2), min_size=2, max_size=2), st.floats(-2, 2))
def test_charts_are_exact_translators(phis, lam):
    phi = (*phis, np.pi - sum(phis))
    if phi[-1] <= 0.05:
        return
    spec = RigidMotionSpec(phi, lam)
    rng = np.random.default_rng(0)
    par = rng.uniform(-1.4, 1.4, (50, 3))
    bg = KahlerBackground(3)
    for chart in (GrimChart(3), GrimChart(3).moved(spec)):
        fr = chart_eval(chart, par)
        assert np.max(np.abs(translator_residual(fr.point, fr.jacobian, bg))) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6), st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_affine_inverse_and_composition(v, angles):
    A = AffineMap(np.exp(1j * np.array(angles)), np.array(v[:3]) + 1j * np.array(v[3:]))
    z = np.array([0.3 + 1j, -2.0, 0.5j])
    assert np.allclose(A.inverse()(A(z)), z)
    assert np.allclose(A.compose(A.inverse())(z), z)


def test_apply_motion_matches_affine_map():
    spec = RigidMotionSpec((1.0, 1.0, np.pi - 2.0), 0.4)
    z = np.array([1 + 1j, 2.0, -1j])
    assert np.allclose(apply_motion(spec, z), AffineMap.from_motion(spec)(z))
    assert spec.admissible and spec.is_equal_angle()


def test_configuration_rejects_angle_violation():
    with pytest.raises(AngleConditionViolated):
        build_configuration([RigidMotionSpec((1.0, 1.0, 1.0), 0.0)])


def test_load_configuration_from_dict():
    cfg = load_configuration({"m": 3, "motions": [{"phi": [np.pi / 4, np.pi / 4, np.pi / 2], "lambda": 0.0},
                                                  {"phi": [np.pi / 3, np.pi / 3, np.pi / 3], "lambda": -1.0}]})
    assert len(cfg.records) == 2
    assert cfg.records[1].charts == (1, 2)
    assert cfg.t_finite()
    assert cfg.records[0].s0 == pytest.approx(-np.pi / 4, abs=1e-12)
