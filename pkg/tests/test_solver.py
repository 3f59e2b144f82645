import numpy as np
import pytest

from lagglue.errors import IterationDiverged
from lagglue.reduced import gradient_norm
from lagglue.solver import (ball_exponent, calibrate_defect, derivative_norms, picard_iterate, quadratic_remainder,
                            random_field, remainder_scan, residual_norm, sobolev_norm)
from lagglue.weighted import WeightSpec


def test_ball_exponent_is_midpoint():
    assert ball_exponent(3, 0.9, -0.5) == pytest.approx(0.5 * (2.5 + 2.55))


def test_random_field_is_scaled_to_chart(reduced_mesh):
    u = random_field(reduced_mesh, np.random.default_rng(0), amplitude=0.5)
    assert np.max(gradient_norm(reduced_mesh, u) / reduced_mesh.rho) == pytest.approx(0.05)


def test_first_derivative_norms_agree(reduced_mesh):
    M = reduced_mesh
    u = random_field(M, np.random.default_rng(1))
    g1 = derivative_norms(M, u, 1)[0]
    g0 = gradient_norm(M, u)[M.unknowns]
    assert np.allclose(g1, g0, rtol=1e-10, atol=1e-14)


def test_norms_are_homogeneous(reduced_mesh):
    M = reduced_mesh
    u = random_field(M, np.random.default_rng(2))
    for spec in (WeightSpec(0), WeightSpec(1), WeightSpec(3)):
        assert sobolev_norm(M, 3 * u, spec) == pytest.approx(3 * sobolev_norm(M, u, spec))
    assert residual_norm(M, u) == sobolev_norm(M, u, WeightSpec(0, 2.0, 0.5, -2.5))


def test_picard_converges_with_exact_jacobian(reduced_mesh):
    h = picard_iterate(reduced_mesh, max_iter=5, tol=1e-5)
    assert h.converged and h.reduction >= 1e5
    assert all(b >= a for a, b in zip(h.residual[1:], h.residual[:-1]))


def test_picard_with_finite_volume_operator(surface):
    """The FV operator differs from the exact Jacobian by O(h^2); its stagnation level falls with h."""
    from lagglue.reduced import ReducedResolution, build_reduced_mesh
    stall = []
    for fac in (1, 2):
        M = build_reduced_mesh(surface, ReducedResolution().refined(fac))
        h = picard_iterate(M, max_iter=5, tol=1e-12, linear="fv")
        stall.append(h.residual[-1])
    assert h.reduction >= 100
    assert stall[0] / stall[1] > 4


def test_picard_floor_stop(reduced_mesh):
    h = picard_iterate(reduced_mesh, max_iter=5, tol=1e-12, floor=1e-4)
    assert h.reason == "floor" and h.residual[-1] <= 1e-4


def test_picard_divergence_is_reported(reduced_mesh, monkeypatch):
    import lagglue.solver as solver

    class Backwards:
        def __init__(self, lu):
            self.lu = lu

        def solve(self, b):
            return -0.5 * self.lu.solve(b)

    real = solver._linear_solver
    monkeypatch.setattr(solver, "_linear_solver", lambda *a: Backwards(real(*a)))
    with pytest.raises(IterationDiverged):
        picard_iterate(reduced_mesh, max_iter=5, tol=1e-8, chart_factor=10.0)


def test_remainder_scan_slopes(reduced_mesh):
    rng = np.random.default_rng(5)
    fields = [random_field(reduced_mesh, rng) for _ in range(2)]
    sc = remainder_scan(reduced_mesh, fields)
    assert np.all(np.abs(sc.slopes - 2) < 0.05)


def test_quadratic_remainder_difference(reduced_mesh):
    rng = np.random.default_rng(6)
    u, v = random_field(reduced_mesh, rng), random_field(reduced_mesh, rng)
    assert np.allclose(quadratic_remainder(reduced_mesh, u, v),
                       quadratic_remainder(reduced_mesh, u) - quadratic_remainder(reduced_mesh, v))
    assert np.abs(quadratic_remainder(reduced_mesh, u, u)).max() == 0.0


def test_calibrated_defect_constant(reduced_mesh):
    c = calibrate_defect(reduced_mesh)
    h = picard_iterate(reduced_mesh, max_iter=5, tol=1e-5)
    assert all(d <= c * g**2 for d, g in zip(h.defect[1:], h.max_grad[1:]))
