import numpy as np
import pytest

from lagglue.errors import ChartOverflow, ConfigError, SymmetryRequired
from lagglue.glue import build_glued_surface, glued_residual
from lagglue.grim import RigidMotionSpec, build_configuration
from lagglue.reduced import (ReducedResolution, build_reduced_mesh, chart_bound, chart_ratio, gradient_norm,
                             linearization, perturbed_theta)
from lagglue.solver import random_field
from lagglue.weighted import fit_slope


def test_mesh_matches_full_evaluation(surface, reduced_mesh):
    th, gf = glued_residual(surface, reduced_mesh.slice_x(), reduced_mesh.y)
    assert np.abs(th - reduced_mesh.residual).max() < 1e-8
    assert np.allclose(gf.region, reduced_mesh.region)


def test_mesh_layout(reduced_mesh):
    M = reduced_mesh
    assert M.size == M.grid.size and M.unknowns.size == M.grid.n1 * (M.grid.n2 - 2)
    assert np.all(np.diff(M.ell) > 0) and np.all(np.diff(M.y[:M.grid.n2]) > 0)
    assert np.abs(M.y).max() == pytest.approx(M.R_out / M.t)
    # residual is e^{-f/2} sin(theta_f) at every node
    assert np.allclose(M.residual, np.exp(-0.5 * M.f) * np.sin(M.theta_f), atol=1e-12)


def test_unperturbed_theta_is_the_residual(reduced_mesh):
    pt = perturbed_theta(reduced_mesh, np.zeros(reduced_mesh.unknowns.size))
    assert np.allclose(pt.theta, reduced_mesh.residual[reduced_mesh.unknowns], atol=1e-14)
    assert pt.max_grad == 0.0 and pt.defect.max() < 1e-12


def test_refined_resolution():
    r = ReducedResolution().refined(2)
    assert (r.n_theta, r.per_unit) == (48, 24.0)


def test_requires_equal_angle_motion():
    cfg = build_configuration([RigidMotionSpec((0.5, 1.0, np.pi - 1.5), 0.0)])
    with pytest.raises(SymmetryRequired):
        build_reduced_mesh(build_glued_surface(cfg, 0.05))


@pytest.mark.parametrize("kwargs", [dict(R_prime=2.0), dict(R_out=0.1), dict(R_out=48.0)])
def test_truncation_guards(surface, kwargs):
    with pytest.raises(ConfigError):
        build_reduced_mesh(surface, **kwargs)


def test_chart_guard(reduced_mesh):
    u = random_field(reduced_mesh, np.random.default_rng(0), amplitude=1.0)
    assert chart_ratio(reduced_mesh, u) == pytest.approx(0.1)
    assert np.all(gradient_norm(reduced_mesh, u) <= chart_bound(reduced_mesh, 0.1) * (1 + 1e-12))
    with pytest.raises(ChartOverflow):
        perturbed_theta(reduced_mesh, 3.0 * u)


def test_linearization_matches_difference_quotient(reduced_mesh):
    M = reduced_mesh
    u = random_field(M, np.random.default_rng(3))
    J = linearization(M)
    th0 = M.residual[M.unknowns]
    errs = [np.abs(perturbed_theta(M, s * u).theta - th0 - s * (J @ u)).max() for s in (1e-3, 1e-2, 1e-1)]
    assert fit_slope([1e-3, 1e-2, 1e-1], errs, exclude_largest=False) == pytest.approx(2.0, abs=0.05)


def test_lagrangian_defect_is_quadratic_up_to_discretization(surface):
    """defect(s u) = O(h^2) s + c s^2: the first-order part is a discretization artefact."""
    linear, full = [], []
    for fac in (1, 2, 4):
        M = build_reduced_mesh(surface, ReducedResolution().refined(fac))
        u = random_field(M, np.random.default_rng(4))
        linear.append(perturbed_theta(M, 1e-3 * u).defect.max() / 1e-3)
        full.append(perturbed_theta(M, u).defect.max())
    assert linear[0] / linear[1] > 3.5 and linear[1] / linear[2] > 3.5
    assert abs(full[2] / full[1] - 1) < 0.05
