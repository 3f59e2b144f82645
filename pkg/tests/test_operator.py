import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from lagglue.errors import SpectralFailure
from lagglue.grid import Grid2D
from lagglue.operator import assemble_fields, assemble_L, mesh_weights, sigma_min, wing_potential
from lagglue.reduced import ReducedResolution, build_reduced_mesh, linearization
from lagglue.weighted import WeightSpec, fit_slope


def _identity_metric(n):
    return np.tile(np.eye(2), (n, 1, 1))


def flat_dirichlet_sigma(n):
    g = Grid2D(n + 1, n + 1, 1.0 / n, 1.0 / n, "dirichlet")
    L = assemble_fields(g, np.ones(g.size), _identity_metric(g.size), np.zeros((g.size, 2)))
    return sigma_min(-L).sigma


def test_flat_laplacian_lowest_eigenvalue():
    assert abs(flat_dirichlet_sigma(64) / (2 * np.pi**2) - 1) < 0.02


def test_drift_term_on_polynomial():
    n = 64
    g = Grid2D(n + 1, n + 1, 1.0 / n, 1.0 / n, "dirichlet")
    i, j = np.divmod(np.arange(g.size), n + 1)
    x, y = i / n, j / n
    u = x * (1 - x) * y * (1 - y)
    df = np.zeros((g.size, 2))
    df[:, 1] = -2.0  # f = -2 y, so Delta_f u = Delta u + d_y u
    L = assemble_fields(g, np.ones(g.size), _identity_metric(g.size), df)
    exact = -2 * y * (1 - y) - 2 * x * (1 - x) + x * (1 - x) * (1 - 2 * y)
    k = g.unknowns
    assert np.abs(L @ u[k] - exact[k]).max() < 1e-3


def test_axis_grid_on_the_sphere_converges_second_order():
    errs = []
    for n1 in (16, 32, 64):
        n2 = n1 + 1
        g = Grid2D(n1, n2, np.pi / n1, 1.0 / (n2 - 1))
        i, j = np.divmod(np.arange(g.size), n2)
        th, s = (i + 0.5) * np.pi / n1, j / (n2 - 1)
        u = np.cos(th) * np.sin(np.pi * s)
        L = assemble_fields(g, np.sin(th), _identity_metric(g.size), np.zeros((g.size, 2)))
        k = g.unknowns
        errs.append(np.abs(L @ u[k] + (2 + np.pi**2) * u[k]).max())
    assert fit_slope([1 / 16, 1 / 32, 1 / 64], errs) > 1.9


@pytest.mark.parametrize("beta", [-0.75, -0.5, -0.25])
def test_conjugated_strip_operator_has_wing_potential(beta):
    n2, R = 801, 8.0
    h = 2 * R / (n2 - 1)
    g = Grid2D(3, n2, 1.0, h)
    s = -R + (np.arange(g.size) % n2) * h
    f = -2 * np.log(np.cosh(s))
    df = np.zeros((g.size, 2))
    df[:, 1] = -2 * np.tanh(s)
    L = assemble_fields(g, np.ones(g.size), _identity_metric(g.size), df)
    k = g.unknowns
    W = np.exp(0.5 * beta * f[k])
    A = sp.diags(W) @ L @ sp.diags(1 / W)
    inner = np.abs(s[k]) < R - 1
    pot = wing_potential(beta, s[k][inner])
    assert np.abs((A @ np.ones(k.size))[inner] - pot).max() < h**2  # second-order truncation
    assert np.all(pot < 0)


@settings(max_examples=60, deadline=None)
@given(st.floats(-0.99, -0.01), st.floats(-50, 50))
def test_wing_potential_is_negative_and_bounded(beta, s):
    v = float(wing_potential(beta, s))
    assert beta - 1e-12 <= v <= beta * (1 + beta) + 1e-12 < 0


def test_sigma_min_detects_singular_matrix():
    with pytest.raises(SpectralFailure):
        sigma_min(sp.csr_matrix(np.array([[1.0, 1.0], [1.0, 1.0]])))


def test_sigma_min_of_diagonal():
    res = sigma_min(sp.diags([3.0, 0.5, 2.0]))
    assert res.sigma == pytest.approx(0.5, rel=1e-8)


def test_weighted_operator_is_conjugation(reduced_mesh):
    op = assemble_L(reduced_mesh)
    w_in, w_out = mesh_weights(reduced_mesh, WeightSpec())
    u = np.random.default_rng(0).standard_normal(op.size)
    assert np.allclose(op.matrix @ (w_in * u), w_out * (op.L @ u))
    assert op.boundary["theta"] == "axis reflection"


def test_finite_volume_operator_converges_to_exact_jacobian(surface):
    """The FV operator and the exact discrete Jacobian share a limit."""
    diffs = []
    for fac in (1, 2, 4):
        M = build_reduced_mesh(surface, ReducedResolution().refined(fac))
        k = M.unknowns
        th, ell = M.node_theta()[k], M.ell[k % M.grid.n2]
        u = np.cos(th) ** 2 * np.cos(np.pi * ell / (2 * M.ell[-1])) ** 2 * np.exp(-ell**2 / 4)
        _, w_out = mesh_weights(M, WeightSpec())
        diffs.append(np.linalg.norm(w_out * (assemble_L(M).L @ u - linearization(M) @ u)))
    assert fit_slope([1.0, 0.5, 0.25], diffs) >= 1.8
