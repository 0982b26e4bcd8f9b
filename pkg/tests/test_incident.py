import math

import numpy as np
import pytest

from tangent_fields import (DomainError, axial, combine, constant, linear_x1, plane_wave,
                            point_source, polynomial)
from tangent_fields.incident import from_spec
from tangent_fields.quadrature import ball_grid

FIELDS = {
    "plane": lambda: plane_wave([0, 0.6, 0.8], 0.3),
    "source": lambda: point_source([5.0, 1.0, -2.0], 0.3),
    "axial": lambda: axial(0.3),
    "quadratic": lambda: polynomial(1.0, [0.5, -1, 2], np.diag([1.0, 2.0, -3.0])),
    "sum": lambda: combine([(2.0, plane_wave([1, 0, 0], 0.3)), (1j, axial(0.3))]),
}


@pytest.mark.parametrize("name", FIELDS)
def test_gradient_matches_finite_differences(name, rng):
    u = FIELDS[name]()
    x = rng.uniform(-1, 1, (6, 3))
    h = 1e-5
    fd = np.column_stack([(u.value(x + h * e) - u.value(x - h * e)) / (2 * h)
                          for e in np.eye(3)])
    np.testing.assert_allclose(u.gradient(x), fd, atol=1e-8)


@pytest.mark.parametrize("name", ["plane", "source", "axial", "sum"])
def test_helmholtz_fields_solve_the_equation(name, rng):
    u = FIELDS[name]()
    x = rng.uniform(-1, 1, (4, 3))
    h = 1e-3
    lap = sum(u.value(x + h * e) - 2 * u.value(x) + u.value(x - h * e) for e in np.eye(3)) / h ** 2
    np.testing.assert_allclose(lap + 0.09 * u.value(x), 0, atol=1e-6)


@pytest.mark.parametrize("name", FIELDS)
def test_ball_integral_matches_quadrature(name):
    u = FIELDS[name]()
    center, radius = np.array([0.3, -0.2, 0.5]), 1.2
    b = ball_grid(center, radius, 24, 24)
    ref = np.sum(b.weights * u.value(b.nodes))
    assert u.ball_integral(center, radius) == pytest.approx(ref, rel=1e-11)


def test_small_frequency_ball_factor_is_continuous():
    w = 0.009999
    series = plane_wave([1, 0, 0], w).ball_integral([0, 0, 0], 1.0)
    closed = 4 * math.pi * (math.sin(w) - w * math.cos(w)) / w ** 3
    assert series.real == pytest.approx(closed, rel=1e-9)
    assert axial(0.0).value([[2.0, 0, 0]])[0] == 2.0


def test_plane_wave_requires_unit_direction():
    with pytest.raises(DomainError):
        plane_wave([0, 0, 2], 0.1)
    with pytest.raises(DomainError):
        plane_wave([0, 0, 0], 0.1)
    with pytest.raises(DomainError):
        plane_wave([0, 0, 1], -0.1)


def test_point_source_inside_ball_rejected():
    with pytest.raises(DomainError):
        point_source([0.1, 0, 0], 0.1).ball_integral([0, 0, 0], 1.0)


def test_static_flags_and_linearity(rng):
    assert constant(2.0).is_static and linear_x1().is_static
    assert not plane_wave([0, 0, 1], 0.1).is_static
    assert (constant(1.0) + linear_x1()).is_static
    x = rng.normal(size=(5, 3))
    u, v = FIELDS["plane"](), FIELDS["axial"]()
    w = u + v.scaled(3 - 1j)
    np.testing.assert_allclose(w.value(x), u.value(x) + (3 - 1j) * v.value(x), rtol=1e-14)
    assert w.omega == 0.3
    with pytest.raises(DomainError):
        combine([])


def test_from_spec_and_describe():
    assert from_spec({"kind": "plane_wave", "direction": [0, 0, 1]}, 0.2).describe()[
        "direction"] == [0.0, 0.0, 1.0]
    assert from_spec({"kind": "x1"}, 0.2).value([[3.0, 1, 1]])[0] == 3.0
    assert from_spec({"kind": "constant", "value": 2.5}, 0.0).value([[0, 0, 0]])[0] == 2.5
    assert from_spec({"kind": "axial"}, 0.2).omega == 0.2
    assert from_spec({"kind": "point_source", "location": [0, 0, 9]}, 0.2).kind == "point_source"
    assert from_spec({"kind": "polynomial", "a0": 1.0}, 0).value([[1, 1, 1]])[0] == 1
    with pytest.raises(DomainError):
        from_spec({"kind": "bogus"}, 0.1)
    d = FIELDS["sum"]().describe()
    assert d["kind"] == "sum" and len(d["parts"]) == 2
