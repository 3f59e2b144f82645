import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lagglue.errors import IncompleteField
from lagglue.weighted import (RadiusField, WeightSpec, deterministic_sum, fit_slope, norm_density,
                              predicted_exponent, weighted_norm)


def test_predicted_exponent_demo_value():
    assert predicted_exponent(3, 0.9, -0.5) == pytest.approx(2.55)


def test_radius_field_pieces():
    rho = RadiusField(0.05, R_hat=0.6, eps=0.5)
    r = np.array([0.0, 0.03, 0.1, 0.4, 1.0, 2.0])
    vals = rho(r)
    assert vals[0] == pytest.approx(0.05 * 0.3)
    assert np.allclose(vals[1:4], r[1:4])
    assert np.allclose(vals[4:], 1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.005, 0.1), st.floats(0.0, 3.0))
def test_radius_field_positive_and_continuous(t, r):
    rho = RadiusField(t)
    v = rho(np.array([r, r + 1e-9]))
    assert v[0] > 0
    assert abs(v[1] - v[0]) < 1e-7


def test_fit_slope_exact_power_law():
    ts = np.array([0.02, 0.03, 0.045, 0.067, 0.1])
    assert fit_slope(ts, 3.0 * ts**2.55) == pytest.approx(2.55)
    # the largest t is dropped by default with five points
    v = ts**2.0
    v[-1] *= 10
    assert fit_slope(ts, v) == pytest.approx(2.0)
    assert fit_slope(ts, v, exclude_largest=False) > 2.0
    assert np.isnan(fit_slope(ts, np.zeros(5)))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=60), st.integers(0, 1000))
def test_deterministic_sum_order_independent(values, seed):
    perm = np.random.default_rng(seed).permutation(len(values))
    assert deterministic_sum(values) == deterministic_sum(np.asarray(values)[perm])


def test_region_parts_add_up():
    rng = np.random.default_rng(0)
    n = 200
    u, g = rng.standard_normal(n), rng.random(n)
    w, rho, f = rng.random(n), rng.uniform(0.1, 1, n), rng.standard_normal(n)
    reg = rng.integers(1, 5, n)
    spec = WeightSpec()
    norm, parts = weighted_norm(u, g, w, rho, f, spec, 3, reg)
    assert sum(parts.values()) == pytest.approx(norm**2)
    assert weighted_norm(u, g, w, rho, f, spec, 3) == norm


def test_norm_density_needs_gradient():
    with pytest.raises(IncompleteField):
        norm_density(np.ones(3), None, np.ones(3), np.zeros(3), WeightSpec(), 3)
    d0 = norm_density(np.ones(3), None, np.ones(3), np.zeros(3), WeightSpec(k=0), 3)
    assert np.allclose(d0, 1.0)


def test_weight_spec_helpers():
    spec = WeightSpec().shifted(1.0, -2.0)
    assert (spec.beta, spec.gamma) == (0.5, -2.5)
    WeightSpec().check_analysis_range(3)
    with pytest.raises(ValueError):
        WeightSpec(gamma=-1.5).check_analysis_range(3)
