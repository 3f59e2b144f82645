import csv
import io

import numpy as np
import pytest

from lagglue.mesh import Resolution, annulus_rule, mesh_csv, mesh_obj, radial_rule, sample_mesh
from lagglue.quadrature import sphere_area


def test_annulus_volume():
    X, r, W = annulus_rule(3, 0.5, 2.0, n_polar=6, n_r=16)
    assert W.sum() == pytest.approx(4 * np.pi / 3 * (8 - 0.125), rel=1e-12)
    assert np.allclose(np.linalg.norm(X, axis=1), r)


def test_radial_rule_integrates_smooth_functions():
    y, w = radial_rule(30.0, Resolution())
    assert w.sum() == pytest.approx(60.0, rel=1e-12)
    assert np.sum(w * np.exp(-y**2)) == pytest.approx(np.sqrt(np.pi), rel=1e-10)


def test_refined_resolution():
    r = Resolution().refined(2)
    assert (r.n_polar, r.panels_per_unit) == (24, 12.0)


@pytest.fixture(scope="module")
def samples(surface):
    return sample_mesh(surface, Resolution(n_polar=6, panels_per_unit=3), with_gradient=False)


def test_sample_volume_matches_cone_near_vertex(surface, samples):
    # the neck region is close to a pair of cones at scale t^tau; its volume is bounded by two balls
    sel = samples.r <= surface.boundaries["t_tau"]
    vol = samples.weights[sel].sum()
    ball = 4 * np.pi / 3 * surface.boundaries["t_tau"] ** 3
    assert 0.5 * ball < vol < 2.5 * ball


def test_mesh_csv_layout(samples):
    text = mesh_csv(samples)
    assert "\r\n" in text
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0][:4] == ["x1", "x2", "x3", "y"] and rows[0][-2:] == ["rho", "theta"]
    assert len(rows) == samples.size + 1
    assert set(r[4] for r in rows[1:]) <= {"I", "II", "III", "wing"}


def test_mesh_obj_projection(samples):
    obj = mesh_obj(samples.point)
    verts = [l for l in obj.splitlines() if l.startswith("v ")]
    assert len(verts) == samples.size
    first = np.array(verts[0].split()[1:], float)
    p = samples.point[0]
    assert np.allclose(first, [p[0].real, p[2].real, p[2].imag])
    assert sphere_area(3) == pytest.approx(4 * np.pi)
