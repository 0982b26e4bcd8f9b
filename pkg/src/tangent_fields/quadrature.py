"""Product quadrature on spheres and balls.

Gauss-Legendre nodes in the polar angle theta times the trapezoid rule in the
azimuth (``2 * order`` points). The polar axis of every grid lies along x1
and ``theta = 0`` is the pole facing the gap, so Gauss-Legendre clustering
near the endpoints resolves the near-contact region.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import BarycentricInterpolator

from .errors import DomainError
from .geometry import InclusionPair, as_points


@lru_cache(maxsize=64)
def _gl_theta(n: int):
    t, w = leggauss(n)
    theta = 0.5 * np.pi * (t + 1.0)
    wt = 0.5 * np.pi * w
    # exact surface area at every order; a no-op to rounding once order >= 8
    wt = wt * (2.0 / np.sum(wt * np.sin(theta)))
    theta.setflags(write=False)
    wt.setflags(write=False)
    return theta, wt


@lru_cache(maxsize=64)
def _theta_basis(n: int) -> BarycentricInterpolator:
    """Interpolator whose output rows are the Lagrange basis at given angles."""
    return BarycentricInterpolator(_gl_theta(n)[0], np.eye(n))


def _frame(axis_sign: float):
    e_ax = np.array([axis_sign, 0.0, 0.0])
    e2 = np.array([0.0, 1.0, 0.0])
    e3 = np.array([0.0, 0.0, axis_sign])
    return e_ax, e2, e3


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Quadrature on a sphere; nodes are stored theta-major."""

    center: np.ndarray
    radius: float
    order: int
    axis_sign: float
    owner: int
    theta: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    nodes: np.ndarray = field(repr=False)
    normals: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def n_phi(self) -> int:
        return self.phi.size

    def pole_spacing(self) -> float:
        """Arc length between the gap pole and the first ring of nodes."""
        return float(self.radius * 2.0 * self.theta[0])

    def local_coords(self, x):
        """Polar/azimuthal angles of points relative to this grid's frame."""
        p = as_points(x) - self.center
        e_ax, e2, e3 = _frame(self.axis_sign)
        a = p @ e_ax
        b = p @ e2
        c = p @ e3
        rho = np.sqrt(a * a + b * b + c * c)
        theta = np.arccos(np.clip(a / np.where(rho > 0, rho, 1.0), -1.0, 1.0))
        phi = np.mod(np.arctan2(c, b), 2.0 * np.pi)
        return rho, theta, phi

    def as_matrix(self, values) -> np.ndarray:
        """Reshape nodal values to (n_theta, n_phi, ...)."""
        v = np.asarray(values)
        return v.reshape((self.order, self.n_phi) + v.shape[1:])

    def integrate(self, values):
        return np.tensordot(self.weights, np.asarray(values), axes=(0, 0))

    def _phi_coefficients(self, values):
        v = self.as_matrix(values)
        return np.fft.fft(v, axis=1) / self.n_phi

    def _eval_phi(self, coeffs, phi):
        m = self.n_phi
        k = np.fft.fftfreq(m, d=1.0 / m)
        # symmetric treatment of the Nyquist mode keeps real data real
        nyq = m // 2
        e = np.exp(1j * np.outer(phi, k))
        e[:, nyq] = np.cos(nyq * phi)
        return np.einsum("pk,tk...->pt...", e, coeffs)

    def interpolate(self, values, points) -> np.ndarray:
        """Trigonometric (azimuth) x polynomial (polar) interpolation of
        nodal values to on-surface points."""
        vals = np.asarray(values)
        _, th, ph = self.local_coords(points)
        coeffs = self._phi_coefficients(vals)
        rows = self._eval_phi(coeffs, ph)  # (P, n_theta, ...)
        basis = _theta_basis(self.order)(th)  # (P, n_theta)
        out = np.einsum("pk,pk...->p...", basis, rows)
        if not np.iscomplexobj(vals):
            return out.real
        return out

    def resample(self, values, order: int) -> tuple["SphereGrid", np.ndarray]:
        """Interpolate nodal values onto a grid of a different order."""
        fine = sphere_grid(self.center, self.radius, order, self.axis_sign, self.owner)
        vals = np.asarray(values)
        coeffs = self._phi_coefficients(vals)
        rows = self._eval_phi(coeffs, fine.phi)  # (n_phi_f, n_theta, ...)
        interp = BarycentricInterpolator(self.theta, np.moveaxis(rows, 1, 0))
        out = np.moveaxis(interp(fine.theta), 1, 1)  # (n_theta_f, n_phi_f, ...)
        out = out.reshape((fine.size,) + vals.shape[1:])
        if not np.iscomplexobj(vals):
            out = out.real
        return fine, out

    def azimuthal_modes(self, values):
        """Profiles ``int f dphi``, ``int f cos(phi) dphi``, ``int f sin(phi) dphi``
        for every polar ring (exact for the trapezoid rule)."""
        v = self.as_matrix(values)
        w = 2.0 * np.pi / self.n_phi
        f0 = v.sum(axis=1) * w
        fc = (v * np.cos(self.phi)[None, :]).sum(axis=1) * w
        fs = (v * np.sin(self.phi)[None, :]).sum(axis=1) * w
        return f0, fc, fs


def sphere_grid(center, radius: float, order: int, axis_sign: float = 1.0,
                owner: int = 0) -> SphereGrid:
    if order < 4:
        raise DomainError(f"order must be >= 4, got {order}")
    theta, wt = _gl_theta(int(order))
    m = 2 * int(order)
    phi = 2.0 * np.pi * np.arange(m) / m
    wp = 2.0 * np.pi / m
    e_ax, e2, e3 = _frame(axis_sign)
    st, ct = np.sin(theta), np.cos(theta)
    n = (ct[:, None, None] * e_ax
         + (st[:, None] * np.cos(phi)[None, :])[..., None] * e2
         + (st[:, None] * np.sin(phi)[None, :])[..., None] * e3).reshape(-1, 3)
    center = np.asarray(center, dtype=float).reshape(3).copy()
    nodes = center + radius * n
    weights = (radius * radius * st * wt)[:, None].repeat(m, axis=1).ravel() * wp
    for a in (center, nodes, n, weights):
        a.setflags(write=False)
    return SphereGrid(center, float(radius), int(order), float(axis_sign), owner,
                      theta, phi, nodes, n, weights)


def pole_grid(center, radius: float, pole, order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Product rule on a sphere rotated so that ``theta = 0`` sits at the
    on-surface point ``pole``; returns (nodes, normals, weights).

    The ``sin(theta)`` Jacobian cancels the ``1/|x - y|`` singularity at the
    pole, which makes the rule spectrally accurate for weakly singular
    integrands centered there.
    """
    center = np.asarray(center, dtype=float).reshape(3)
    a = np.asarray(pole, dtype=float).reshape(3) - center
    a = a / np.linalg.norm(a)
    # any orthonormal completion
    helper = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e2 = np.cross(a, helper)
    e2 /= np.linalg.norm(e2)
    e3 = np.cross(a, e2)
    theta, wt = _gl_theta(int(order))
    m = 2 * int(order)
    phi = 2.0 * np.pi * np.arange(m) / m
    st, ct = np.sin(theta), np.cos(theta)
    n = (ct[:, None, None] * a
         + (st[:, None] * np.cos(phi)[None, :])[..., None] * e2
         + (st[:, None] * np.sin(phi)[None, :])[..., None] * e3).reshape(-1, 3)
    w = (radius * radius * st * wt)[:, None].repeat(m, axis=1).ravel() * (2.0 * np.pi / m)
    return center + radius * n, n, w


def make_grid(pair: InclusionPair, which: int, order: int) -> SphereGrid:
    """Grid on the boundary of B1 (``which=1``) or B2 (``which=2``), with the
    polar pole at the gap."""
    sign = -1.0 if which == 1 else 1.0
    return sphere_grid(pair.center(which), pair.radius, order, sign, which)


@dataclass(frozen=True, eq=False)
class BallGrid:
    center: np.ndarray
    radius: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)


def ball_grid(center, radius: float, n_radial: int, order: int,
              axis_sign: float = 1.0) -> BallGrid:
    """Radial Gauss-Legendre (weight s^2) times the sphere product rule."""
    t, w = leggauss(int(n_radial))
    s = 0.5 * radius * (t + 1.0)
    ws = 0.5 * radius * w * s * s
    unit = sphere_grid(np.zeros(3), 1.0, order, axis_sign)
    center = np.asarray(center, dtype=float).reshape(3)
    nodes = center + (s[:, None, None] * unit.normals[None, :, :]).reshape(-1, 3)
    weights = (ws[:, None] * unit.weights[None, :]).ravel()
    return BallGrid(center, float(radius), nodes, weights)


def newton_potential_ball(points, center, radius: float) -> np.ndarray:
    """``int_B dx / |x - p|`` for the ball B(center, radius), any p."""
    p = as_points(points)
    d = np.linalg.norm(p - np.asarray(center, dtype=float), axis=1)
    inside = 2.0 * np.pi * (radius * radius - d * d / 3.0)
    with np.errstate(divide="ignore"):
        outside = (4.0 * np.pi * radius ** 3 / 3.0) / d
    return np.where(d <= radius, inside, outside)
