import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tangent_fields import (DomainError, EvalRegion, QuasiStaticWarning, SingularityError,
                            check_quasi_static, make_pair, reflect)

from conftest import exterior_points


def test_unit_pair_centers():
    pair = make_pair(1, 0, 0.1)
    assert pair.radius == 1.0
    np.testing.assert_allclose(pair.center_plus, [1.1, 0, 0], rtol=0, atol=1e-15)
    np.testing.assert_allclose(pair.center_minus, [-1.1, 0, 0], rtol=0, atol=1e-15)


@pytest.mark.parametrize("alpha", [-1.0, 0.0, 0.5, 1.0, 2.5])
def test_unit_gap_collapses_scales(alpha):
    assert make_pair(1, alpha, 1.0).radius == pytest.approx(1.0, rel=1e-15)


def test_radius_hand_value():
    assert make_pair(2, 0.5, 0.04).radius == pytest.approx(0.4, rel=1e-14)


@pytest.mark.parametrize("args", [(0, 0, 0.1), (-1, 0, 0.1), (1, 0, 0), (1, 0, -0.1),
                                  (1, float("nan"), 0.1)])
def test_invalid_pairs_rejected(args):
    with pytest.raises(DomainError):
        make_pair(*args)


@given(st.floats(0.1, 10), st.floats(-1, 3), st.floats(1e-6, 1.0))
def test_surface_gap_and_radius_law(r_star, alpha, eps):
    pair = make_pair(r_star, alpha, eps)
    assert pair.surface_gap() == pytest.approx(2 * eps, rel=1e-9, abs=1e-12 * pair.radius)
    ratio = pair.radius / make_pair(r_star, 0, eps).radius
    assert ratio == pytest.approx(eps ** alpha, rel=1e-13)
    np.testing.assert_array_equal(pair.center_plus, -pair.center_minus)
    assert pair.center_plus[1] == pair.center_plus[2] == 0


def test_pair_is_immutable(pair01):
    with pytest.raises(Exception):
        pair01.radius = 2.0
    with pytest.raises(ValueError):
        pair01.center_plus[0] = 0.0


def test_reflect_hand_value(pair01):
    np.testing.assert_allclose(reflect(pair01, [1.1, 0, 0]), [-1.1 + 1 / 2.2, 0, 0],
                               rtol=1e-15)
    assert reflect(pair01, [1.1, 0, 0])[0] == pytest.approx(-0.6454545454545455, rel=1e-14)


def test_reflect_fixes_sphere_points(pair01, rng):
    v = rng.normal(size=(50, 3))
    pts = pair01.center_minus + v / np.linalg.norm(v, axis=1)[:, None]
    np.testing.assert_allclose(reflect(pair01, pts), pts, atol=1e-14)


def test_reflect_center_is_singular(pair01):
    with pytest.raises(SingularityError):
        reflect(pair01, pair01.center_minus)


@settings(max_examples=60)
@given(st.floats(0.2, 5), st.floats(-0.5, 2), st.floats(1e-4, 1),
       st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_reflect_involution_and_mirror(r_star, alpha, eps, v):
    pair = make_pair(r_star, alpha, eps)
    x = pair.center_minus + pair.radius * (1.5 + np.abs(np.array(v)))
    back = reflect(pair, reflect(pair, x))
    assert np.linalg.norm(back - x) < 1e-12 * np.linalg.norm(x - pair.center_minus)
    np.testing.assert_allclose(reflect(pair, x, which=1), -reflect(pair, -x, which=2),
                               rtol=1e-13, atol=1e-13 * pair.radius)


def test_quasi_static_guard(pair01):
    assert check_quasi_static(pair01, 0.05)
    with pytest.warns(QuasiStaticWarning):
        assert not check_quasi_static(pair01, 0.5)


def test_eval_region(pair01, rng):
    with pytest.raises(DomainError):
        EvalRegion(pair01, 1.0)
    region = EvalRegion(pair01, 4.0)
    seg = region.gap_segment(11)
    assert seg.shape == (11, 3) and seg[0, 0] == -0.1 and seg[-1, 0] == 0.1
    assert np.all(np.abs(region.gap_segment(11, closed=False)[:, 0]) < 0.1)
    assert region.contains(seg).all()
    assert region.exterior_mask(seg).all()
    assert not region.exterior_mask(pair01.center_plus).any()
    pts = exterior_points(pair01, 20, rng)
    assert region.exterior_mask(pts).all()
    ray = region.axis_ray(2.0, 20.0, 5)
    assert ray[0, 0] == pytest.approx(2.0) and ray[-1, 0] == pytest.approx(20.0)
    assert math.isclose(np.ptp(ray[:, 1]), 0.0)
