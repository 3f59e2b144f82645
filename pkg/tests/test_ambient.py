import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lagglue.ambient import (FrameData, KahlerBackground, induced_metric_and_defect, lagrangian_angles,
                             normalized_defect, omega, principal_angles, real_inner, translator_residual)
from lagglue.errors import DegenerateFrame, NotLagrangian


def test_background_defaults():
    bg = KahlerBackground(3)
    assert np.allclose(bg.T, [0, 0, -1])
    z = np.array([1 + 2j, 0.5j, 3 - 4j])
    assert bg.f(z) == pytest.approx(-6.0)
    assert bg.jt_pairing(z) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        KahlerBackground(3, T=np.zeros(3))


def test_forms_on_standard_basis():
    e1, ie1 = np.array([1, 0], complex), np.array([1j, 0])
    assert omega(e1, ie1) == pytest.approx(1.0)
    assert real_inner(e1, ie1) == pytest.approx(0.0)


def test_real_plane_is_lagrangian_and_degenerate_frame_raises():
    g, d = induced_metric_and_defect(FrameData(np.zeros(3, complex), np.eye(3, dtype=complex)))
    assert np.allclose(g, np.eye(3)) and d == 0.0
    bad = np.eye(3, dtype=complex)
    bad[:, 2] = bad[:, 1]
    with pytest.raises(DegenerateFrame):
        induced_metric_and_defect(FrameData(np.zeros(3, complex), bad))


def test_plane_residual_is_sine_of_angle():
    # the plane e^{i a} R^3 through the origin: theta_L = 3a, f = 0 and <z, JT> = 0 at z = 0
    a = 0.3
    jac = np.exp(1j * a) * np.eye(3)
    rep = lagrangian_angles(FrameData(np.zeros(3, complex), jac), KahlerBackground(3))
    assert rep.theta_L == pytest.approx(3 * a)
    assert rep.residual == pytest.approx(np.sin(3 * a))


def test_principal_angles_of_rotated_plane():
    phi = np.array([0.4, 1.1, np.pi - 1.5])
    angles = principal_angles(np.eye(3, dtype=complex), np.diag(np.exp(1j * phi)))
    assert np.allclose(angles, np.sort(phi), atol=1e-12)
    swapped = principal_angles(np.diag(np.exp(1j * phi)), np.eye(3, dtype=complex))
    assert np.allclose(swapped, np.sort(np.pi - phi), atol=1e-12)


def test_principal_angles_reject_non_lagrangian():
    with pytest.raises(NotLagrangian):
        principal_angles(np.eye(3, dtype=complex), np.array([[1, 0, 0], [1j, 0, 0], [0, 0, 1]], complex).T)


def _lagrangian_frame(rng, m):
    # unitary image of a real frame: U (R^m) is Lagrangian for U in U(m)
    q, _ = np.linalg.qr(rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
    return q @ rng.standard_normal((m, m))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 5))
def test_residual_invariant_under_orientation_preserving_reparametrization(seed, m):
    rng = np.random.default_rng(seed)
    jac = _lagrangian_frame(rng, m)
    A = rng.standard_normal((m, m))
    if np.linalg.det(A) < 0:
        A[:, 0] *= -1
    if abs(np.linalg.det(A)) < 1e-3 or abs(np.linalg.det(jac)) < 1e-3:
        return
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    bg = KahlerBackground(m)
    th1 = translator_residual(z, jac, bg)
    th2 = translator_residual(z, jac @ A, bg)
    assert abs(th1 - th2) < 1e-9 * max(1.0, np.linalg.cond(A))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 5))
def test_unitary_frames_are_lagrangian(seed, m):
    jac = _lagrangian_frame(np.random.default_rng(seed), m)
    if np.linalg.cond(jac) > 1e6:
        return
    assert normalized_defect(jac) < 1e-10
