import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lagglue.cone import (CutoffSpec, WingGraph, cutoff_eval, project_to_graph, recover_potential, smooth_step)
from lagglue.ambient import FrameData
from lagglue.errors import ProjectionFailure
from lagglue.grim import gamma0


def test_smooth_step_values():
    eta, d1, d2 = smooth_step(np.array([0.5, 1.0, 1.5, 2.0, 3.0]))
    assert np.allclose(eta, [0, 0, 0.5, 1, 1])
    assert d1[0] == d1[-1] == 0.0


def test_smooth_step_derivatives():
    s = np.linspace(1.05, 1.95, 19)
    h = 1e-6
    e, d1, d2 = smooth_step(s)
    assert np.allclose(d1, (smooth_step(s + h)[0] - smooth_step(s - h)[0]) / (2 * h), atol=1e-7)
    assert np.allclose(d2, (smooth_step(s + h)[1] - smooth_step(s - h)[1]) / (2 * h), atol=1e-5)


@settings(max_examples=50, deadline=None)
@given(st.floats(-5, 5))
def test_smooth_step_bounds_and_symmetry(s):
    e = float(smooth_step(np.array(s))[0])
    assert 0.0 <= e <= 1.0
    assert abs(e + float(smooth_step(np.array(3.0 - s))[0]) - 1.0) < 1e-12


def test_cutoff_scaling():
    spec = CutoffSpec(0.9)
    t = 0.05
    e, d1, _ = cutoff_eval(spec, t, np.array([1.5 * t**0.9]))
    assert e[0] == pytest.approx(0.5)
    assert d1[0] == pytest.approx(smooth_step(np.array(1.5))[1] * t**-0.9)
    with pytest.raises(ValueError):
        CutoffSpec(1.0)


@pytest.mark.parametrize("s", [-np.pi / 4, np.pi / 4, -1.2])
def test_wing_graph_is_the_curve(s):
    wg = WingGraph(s)
    x = np.linspace(wg.x_lo + 0.05, wg.x_hi - 0.05, 50)
    w = np.exp(-1j * (s - np.pi / 2)) * (gamma0(x) - gamma0(s))
    assert np.allclose(wg.re_w(x), w.real) and np.allclose(wg.im_w(x), w.imag)
    xi = wg.re_w(x)
    assert np.allclose(wg.x_of_xi(xi), x, atol=1e-12)


def test_wing_inversion_far_range():
    wg = WingGraph(-np.pi / 4)
    # re_w saturates near -24.6 where cos x reaches the double precision floor
    assert np.all(np.isfinite(wg.x_of_xi(np.linspace(-30.0, 1.1, 400))))
    # dxi/dx ~ 1 / cos x, so the round trip is accurate up to ulp(x) / cos x
    xi = np.linspace(-20.0, 1.1, 400)
    x = wg.x_of_xi(xi)
    assert np.all(np.abs(wg.re_w(x) - xi) < 1e-10 + 1e-15 / np.cos(x))


def test_projection_onto_plane():
    # the plane graph of u = |x|^2 / 2 over R^2: F(p) = p + i p
    ev = lambda p: FrameData(p + 1j * p, np.eye(2) * (1 + 1j))
    grad, disp, par = project_to_graph(ev, np.ones(2), np.zeros(2), np.array([0.6, 0.8]), 2.0, np.zeros(2))
    assert np.allclose(grad, [1.2, 1.6]) and np.allclose(par, [1.2, 1.6])
    curved = lambda p: FrameData(np.exp(p) + 0j, np.diag(np.exp(p)) + 0j)
    with pytest.raises(ProjectionFailure):
        project_to_graph(curved, np.ones(2), np.zeros(2), np.array([1.0, 0.0]), 5.0, np.zeros(2), max_iter=1)


def test_recover_potential():
    r = np.geomspace(0.01, 1.0, 201)
    u = recover_potential(r, 2 * r, kind="wing")
    assert np.allclose(u, r**2 - r[0] ** 2, atol=1e-8)
    v = recover_potential(r, 2 * r, kind="neck")
    assert np.allclose(v, r**2 - 1.0, atol=1e-8)
    with pytest.raises(ValueError):
        recover_potential(r, r, kind="other")
