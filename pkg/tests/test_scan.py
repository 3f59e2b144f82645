import numpy as np
import pytest

from lagglue.glue import INNER_ANNULUS, NECK_CORE, TRANSITION, WING
from lagglue.mesh import Resolution
from lagglue.scan import error_scan, pointwise_profile, region_trend_exponents


def test_region_trend_exponents():
    ex = region_trend_exponents(3, 0.9, -0.5)
    assert ex[NECK_CORE] == pytest.approx(3.5)
    assert ex[INNER_ANNULUS] == pytest.approx(3.15)
    assert ex[TRANSITION] == pytest.approx(2.55)


def test_scan_requires_span(surface):
    with pytest.raises(ValueError):
        error_scan(surface, [0.02, 0.04])


def test_coarse_scan_report(surface):
    rep = error_scan(surface, [0.02, 0.045, 0.1], resolution=Resolution(n_polar=4, panels_per_unit=2))
    rows = rep.rows()
    assert [r["t"] for r in rows] == [0.02, 0.045, 0.1]
    for i, r in enumerate(rows):
        parts = sum(r[k] ** 2 for k in ("norm_I", "norm_II", "norm_III")) + rep.region_norms[WING][i] ** 2
        assert parts == pytest.approx(r["norm_total"] ** 2, rel=1e-12)
    assert np.all(rep.region_norms[WING] < 1e-10)
    assert rep.predicted == pytest.approx(2.55)
    assert set(rep.summary()) >= {"slope", "predicted", "deviation", "wing_norm_max"}


def test_pointwise_profile(surface):
    prof = pointwise_profile(surface, Resolution(n_polar=4, panels_per_unit=2))
    assert prof.wing_max < 1e-10
    assert prof.annulus_sup.size == 6 and prof.annulus_variation >= 1.0
    assert prof.neck_sup_over_t > 0
