import numpy as np
import pytest

from lagglue.ambient import normalized_defect
from lagglue.errors import OutOfDomain
from lagglue.glue import (INNER_ANNULUS, NECK_CORE, TRANSITION, WING, build_glued_surface, glued_eval,
                          glued_residual, metric_deviation)


@pytest.fixture(scope="module")
def line(surface):
    y = np.linspace(-40, 40, 80001)
    X = np.tile([0.6, 0.0, 0.8], (y.size, 1))
    th, gf = glued_residual(surface, X, y)
    return y, th, gf


def test_region_ordering(surface):
    b = surface.boundaries
    assert 0 < b["t_R_hat"] < b["t_tau"] < b["2t_tau"] < b["eps"]
    with pytest.raises(OutOfDomain):
        surface.with_t(0.5)


def test_all_regions_present(line):
    _, _, gf = line
    assert set(np.unique(gf.region)) == {NECK_CORE, INNER_ANNULUS, TRANSITION, WING}


def test_every_piece_is_lagrangian(line):
    _, _, gf = line
    assert normalized_defect(gf.jacobian).max() < 1e-12


def test_wing_is_an_exact_translator(line):
    _, th, gf = line
    assert np.abs(th[gf.region == WING]).max() < 1e-10


@pytest.mark.parametrize("seam", ["t_tau", "2t_tau"])
def test_frame_continuous_across_seams(surface, line, seam):
    y, _, gf = line
    i = np.argmin(np.abs(gf.r - surface.boundaries[seam]))
    steps = np.abs(np.diff(gf.jacobian[i - 20:i + 20], axis=0)).max(axis=(1, 2))
    jump = np.abs(gf.jacobian[i + 1] - gf.jacobian[i]).max()
    assert jump <= 3 * np.median(steps)


def test_neck_core_residual_scales_with_t(config):
    vals = []
    for t in (0.02, 0.04):
        S = build_glued_surface(config, t)
        y = np.linspace(-0.3, 0.3, 301)
        th, gf = glued_residual(S, np.tile([0.6, 0.0, 0.8], (y.size, 1)), y)
        vals.append(np.abs(th[gf.region == NECK_CORE]).max() / t)
    assert 0.5 < vals[0] / vals[1] < 2.0


def test_transition_metric_deviation_is_small(surface, line):
    y, _, gf = line
    sel = gf.region == TRANSITION
    X = np.tile([0.6, 0.0, 0.8], (sel.sum(), 1))
    dev = metric_deviation(surface, X, y[sel])
    assert dev.max() < 0.1


def test_custom_basis_matches_default(surface):
    x = np.array([[0.0, 0.6, 0.8]])
    y = np.array([0.1])
    a = glued_eval(surface, x, y)
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    from lagglue.lawlor import sphere_basis
    b = glued_eval(surface, x, y, basis=sphere_basis(x) @ rot)
    assert np.allclose(a.point, b.point)
    assert abs(np.linalg.det(a.jacobian)[0] - np.linalg.det(b.jacobian)[0]) < 1e-12
