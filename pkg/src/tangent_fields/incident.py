"""Incident fields: values, gradients and exact ball integrals.

Helmholtz fields (plane wave, point source, axial sine) use the mean-value
property ``int_B u = u(center) * 4 pi (sin(w r) - w r cos(w r)) / w^3``.
Polynomial fields are frequency-independent and integrate exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .geometry import as_point, as_points

KINDS = ("plane_wave", "point_source", "axial", "polynomial", "sum")


def _ball_factor(omega: float, radius: float) -> float:
    """``int_B u / u(center)`` for any Helmholtz solution regular in B."""
    x = omega * radius
    if x < 1e-2:
        # 4 pi r^3 / 3 * (1 - x^2/10 + x^4/280 - x^6/15120)
        x2 = x * x
        return 4.0 * math.pi * radius ** 3 / 3.0 * (1.0 - x2 / 10.0 + x2 * x2 / 280.0
                                                     - x2 ** 3 / 15120.0)
    return 4.0 * math.pi * (math.sin(x) - x * math.cos(x)) / omega ** 3


@dataclass(frozen=True, eq=False)
class IncidentField:
    """An incident field ``u^i``; build instances with the constructors below.

    ``omega`` is ``None`` for the static polynomial kind.
    """

    kind: str
    omega: float | None = None
    direction: np.ndarray | None = field(default=None, repr=False)
    location: np.ndarray | None = field(default=None, repr=False)
    coeffs: tuple | None = field(default=None, repr=False)
    parts: tuple = ()

    # -- evaluation -------------------------------------------------------
    def value(self, x) -> np.ndarray:
        p = as_points(x)
        k = self.kind
        if k == "plane_wave":
            return np.exp(1j * self.omega * (p @ self.direction))
        if k == "point_source":
            d = np.linalg.norm(p - self.location, axis=1)
            return np.exp(1j * self.omega * d) / (4.0 * math.pi * d)
        if k == "axial":
            w = self.omega
            return (p[:, 0].copy() if w == 0 else np.sin(w * p[:, 0]) / w).astype(complex)
        if k == "polynomial":
            a0, b, C = self.coeffs
            return (a0 + p @ b + np.einsum("ni,ij,nj->n", p, C, p)).astype(complex)
        return sum(c * f.value(p) for c, f in self.parts)

    def gradient(self, x) -> np.ndarray:
        p = as_points(x)
        k = self.kind
        if k == "plane_wave":
            e = np.exp(1j * self.omega * (p @ self.direction))
            return 1j * self.omega * e[:, None] * self.direction[None, :]
        if k == "point_source":
            d = p - self.location
            R = np.linalg.norm(d, axis=1)
            w = self.omega
            f = np.exp(1j * w * R) * (1j * w * R - 1.0) / (4.0 * math.pi * R ** 3)
            return f[:, None] * d
        if k == "axial":
            g = np.zeros(p.shape, dtype=complex)
            g[:, 0] = np.cos(self.omega * p[:, 0])
            return g
        if k == "polynomial":
            _, b, C = self.coeffs
            return (b[None, :] + p @ (C + C.T).T).astype(complex)
        return sum(c * f.gradient(p) for c, f in self.parts)

    def ball_integral(self, center, radius: float) -> complex:
        """Exact ``int_{B(center, radius)} u^i dx``."""
        c = as_point(center)
        if self.kind == "polynomial":
            _, _, C = self.coeffs
            vol = 4.0 * math.pi * radius ** 3 / 3.0
            return complex(vol * self.value(c)[0] + 4.0 * math.pi * radius ** 5 / 15.0 * np.trace(C))
        if self.kind == "sum":
            return complex(sum(cf * f.ball_integral(c, radius) for cf, f in self.parts))
        if self.kind == "point_source" and np.linalg.norm(c - self.location) <= radius:
            raise DomainError("point source lies inside the ball")
        return complex(_ball_factor(self.omega, radius) * self.value(c)[0])

    @property
    def is_static(self) -> bool:
        if self.kind == "sum":
            return all(f.is_static for _, f in self.parts)
        return self.kind == "polynomial"

    def __add__(self, other: "IncidentField") -> "IncidentField":
        return combine([(1.0, self), (1.0, other)])

    def scaled(self, c: complex) -> "IncidentField":
        return combine([(c, self)])

    def describe(self) -> dict:
        d = {"kind": self.kind, "omega": self.omega}
        if self.direction is not None:
            d["direction"] = [float(v) for v in self.direction]
        if self.location is not None:
            d["location"] = [float(v) for v in self.location]
        if self.coeffs is not None:
            a0, b, C = self.coeffs
            d["coeffs"] = {"a0": a0, "b": b.tolist(), "C": C.tolist()}
        if self.parts:
            d["parts"] = [{"coeff": [c.real, c.imag] if isinstance(c, complex) else c,
                           "field": f.describe()} for c, f in self.parts]
        return d


def plane_wave(direction, omega: float) -> IncidentField:
    d = as_point(direction)
    n = np.linalg.norm(d)
    if n == 0:
        raise DomainError("plane wave direction must be non-zero")
    if abs(n - 1.0) > 1e-12:
        raise DomainError(f"plane wave direction must be a unit vector, |d| = {n}")
    if omega < 0:
        raise DomainError("omega must be non-negative")
    d = d / n
    d.setflags(write=False)
    return IncidentField("plane_wave", float(omega), direction=d)


def point_source(location, omega: float) -> IncidentField:
    s = as_point(location).copy()
    s.setflags(write=False)
    return IncidentField("point_source", float(omega), location=s)


def axial(omega: float) -> IncidentField:
    """``sin(omega x1) / omega``: the Helmholtz field that reduces to ``x1``."""
    return IncidentField("axial", float(omega))


def polynomial(a0: float = 0.0, b=(0.0, 0.0, 0.0), C=None) -> IncidentField:
    """Static quadratic ``a0 + b.x + x^T C x``."""
    bv = np.asarray(b, dtype=float).reshape(3).copy()
    Cm = np.zeros((3, 3)) if C is None else np.asarray(C, dtype=float).reshape(3, 3).copy()
    bv.setflags(write=False)
    Cm.setflags(write=False)
    return IncidentField("polynomial", None, coeffs=(float(a0), bv, Cm))


def constant(value: float = 1.0) -> IncidentField:
    return polynomial(a0=value)


def linear_x1() -> IncidentField:
    return polynomial(b=(1.0, 0.0, 0.0))


def combine(terms) -> IncidentField:
    """Linear combination ``sum c_k u_k`` from ``[(c_k, u_k), ...]``."""
    parts = tuple((c, f) for c, f in terms)
    if not parts:
        raise DomainError("empty combination")
    om = {f.omega for _, f in parts if f.omega is not None}
    omega = om.pop() if len(om) == 1 else None
    return IncidentField("sum", omega, parts=parts)


def from_spec(spec: dict, omega: float) -> IncidentField:
    """Build a field from a config dict such as ``{"kind": "plane_wave",
    "direction": [0, 0, 1]}``; ``omega`` fills in the frequency."""
    kind = spec.get("kind")
    if kind == "plane_wave":
        return plane_wave(spec.get("direction", (1.0, 0.0, 0.0)), omega)
    if kind == "point_source":
        return point_source(spec["location"], omega)
    if kind == "axial":
        return axial(omega)
    if kind == "x1":
        return linear_x1()
    if kind == "constant":
        return constant(spec.get("value", 1.0))
    if kind == "polynomial":
        return polynomial(spec.get("a0", 0.0), spec.get("b", (0, 0, 0)), spec.get("C"))
    raise DomainError(f"unknown incident field kind {kind!r}")
