import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tangent_fields import DomainError, make_grid, make_pair
from tangent_fields.quadrature import ball_grid, newton_potential_ball, pole_grid, sphere_grid


@pytest.mark.parametrize("order", [4, 8, 16, 33])
def test_weights_sum_to_area(order):
    g = make_grid(make_pair(1, 0, 0.1), 1, order)
    assert g.weights.sum() == pytest.approx(4 * math.pi, rel=1e-12)
    assert g.size == 2 * order * order == g.nodes.shape[0]


def test_unit_area_value():
    g = make_grid(make_pair(1, 0, 0.1), 2, 8)
    assert g.weights.sum() == pytest.approx(12.566370614359172, rel=1e-13)


def test_normals_outward_unit(pair01):
    for which in (1, 2):
        g = make_grid(pair01, which, 12)
        np.testing.assert_allclose(np.linalg.norm(g.normals, axis=1), 1.0, rtol=1e-14)
        np.testing.assert_allclose(g.nodes, g.center + g.radius * g.normals, atol=1e-14)
        # polar pole faces the gap
        gap_side = g.nodes[np.argmin(np.abs(g.nodes[:, 0]))]
        assert abs(gap_side[0]) < pair01.epsilon + 0.05


def test_first_moments(pair01):
    g = make_grid(pair01, 1, 10)
    assert g.integrate(g.nodes[:, 0]) == pytest.approx(4 * math.pi * 1.1, rel=1e-13)
    assert abs(g.integrate(g.nodes[:, 0] - 1.1)) < 1e-13
    assert abs(g.integrate(g.nodes[:, 1] * g.nodes[:, 2])) < 1e-13


def test_order_precondition(pair01):
    with pytest.raises(DomainError):
        make_grid(pair01, 1, 3)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 5), st.integers(0, 5), st.integers(0, 5))
def test_monomial_moments(a, b, c):
    g = sphere_grid(np.zeros(3), 1.0, 28)
    x, y, z = g.nodes.T
    got = g.integrate(x ** a * y ** b * z ** c)
    if a % 2 or b % 2 or c % 2:
        exact = 0.0
    else:
        # 2 Gamma((a+1)/2) Gamma((b+1)/2) Gamma((c+1)/2) / Gamma((a+b+c+3)/2)
        lg = math.lgamma
        exact = 2 * math.exp(lg((a + 1) / 2) + lg((b + 1) / 2) + lg((c + 1) / 2)
                             - lg((a + b + c + 3) / 2))
    assert got == pytest.approx(exact, abs=1e-12)


def test_interpolation_and_resample(rng):
    g = sphere_grid([0.3, -0.2, 0.1], 0.7, 32, axis_sign=-1.0)

    def f(p):
        q = (p - g.center) / g.radius
        return np.exp(q[:, 0]) * np.cos(2 * q[:, 1]) + q[:, 2] ** 3

    v = rng.normal(size=(40, 3))
    pts = g.center + g.radius * v / np.linalg.norm(v, axis=1)[:, None]
    np.testing.assert_allclose(g.interpolate(f(g.nodes), pts), f(pts), atol=1e-10)
    fine, vals = g.resample(f(g.nodes), 48)
    np.testing.assert_allclose(vals, f(fine.nodes), atol=1e-10)
    cplx = g.interpolate(f(g.nodes) * (1 + 2j), pts)
    np.testing.assert_allclose(cplx, f(pts) * (1 + 2j), atol=1e-10)


def test_pole_grid_singular_integral(rng):
    c, r = np.array([1.0, 2.0, -1.0]), 0.8
    v = rng.normal(size=3)
    pole = c + r * v / np.linalg.norm(v)
    nodes, normals, w = pole_grid(c, r, pole, 16)
    assert w.sum() == pytest.approx(4 * math.pi * r * r, rel=1e-12)
    # single-layer potential of a uniform density on its own sphere equals 4 pi r
    val = np.sum(w / np.linalg.norm(nodes - pole, axis=1))
    assert val == pytest.approx(4 * math.pi * r, rel=1e-12)


def test_azimuthal_modes():
    g = sphere_grid(np.zeros(3), 1.0, 8)
    f0, fc, fs = g.azimuthal_modes(g.nodes[:, 1])
    np.testing.assert_allclose(f0, 0, atol=1e-14)
    np.testing.assert_allclose(fc, np.pi * np.sin(g.theta), atol=1e-14)
    np.testing.assert_allclose(fs, 0, atol=1e-14)


def test_ball_grid_volume_and_newton_potential():
    b = ball_grid([0.5, 0, 0], 2.0, 24, 24)
    assert b.weights.sum() == pytest.approx(4 * math.pi * 8 / 3, rel=1e-12)
    assert np.sum(b.weights * b.nodes[:, 0] ** 2) == pytest.approx(
        4 * math.pi * 8 / 3 * 0.25 + 4 * math.pi * 32 / 15, rel=1e-12)
    far = np.array([[6.0, 1.0, 0.0]])
    direct = np.sum(b.weights / np.linalg.norm(b.nodes - far, axis=1))
    assert newton_potential_ball(far, [0.5, 0, 0], 2.0)[0] == pytest.approx(direct, rel=1e-10)
    inside = newton_potential_ball([[0.5, 0, 0]], [0.5, 0, 0], 2.0)[0]
    assert inside == pytest.approx(2 * math.pi * 4, rel=1e-14)
