"""Closed-form singular functions built from the image charges.

``h0(x) = -(1/(4 pi Q)) sum_n q_n (1/|x - c_n| - 1/|x + c_n|)`` is harmonic
outside the balls, constant on each sphere and carries unit flux out of B1
and into B2. ``h_omega`` replaces every monopole by the outgoing Helmholtz
monopole ``exp(i omega R)/R`` (time convention ``exp(-i omega t)``).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, SingularityError
from .geometry import InclusionPair, as_points, check_quasi_static
from .image_charges import ChargeSequence
from .quadrature import make_grid

_BLOCK = 2_000_000  # points x charges per vectorized block


@dataclass(frozen=True)
class FieldSample:
    """Value and gradient; scalars for a single point, arrays for a batch."""

    value: complex | np.ndarray
    gradient: np.ndarray

    @property
    def grad_norm(self):
        g = np.asarray(self.gradient)
        return np.sqrt(np.sum(np.abs(g) ** 2, axis=-1))


@dataclass(frozen=True)
class BoundaryConstants:
    C1: float
    C2: float

    @property
    def difference(self) -> float:
        return self.C1 - self.C2


def _charges(seq: ChargeSequence):
    c = seq.c_n
    return c, seq.q_n


def _sum_fields(seq: ChargeSequence, x, omega: float):
    pts = as_points(x)
    c, q = _charges(seq)
    P = pts.shape[0]
    complex_mode = omega != 0.0
    dtype = complex if complex_mode else float
    val = np.zeros(P, dtype=dtype)
    grad = np.zeros((P, 3), dtype=dtype)
    tol = 1e-14 * seq.radius
    step = max(1, _BLOCK // max(P, 1))
    x1 = pts[:, 0:1]
    rest2 = pts[:, 1] ** 2 + pts[:, 2] ** 2
    for s in range(0, c.size, step):
        cb = c[s:s + step][None, :]
        qb = q[s:s + step][None, :]
        dm = x1 - cb  # x1 - c_n
        dp = x1 + cb  # x1 + c_n
        rm = np.sqrt(dm * dm + rest2[:, None])
        rp = np.sqrt(dp * dp + rest2[:, None])
        if rm.min() <= tol or rp.min() <= tol:
            raise SingularityError("evaluation point coincides with an image charge")
        if complex_mode:
            em = np.exp(1j * omega * rm)
            ep = np.exp(1j * omega * rp)
            fm = qb * em / rm
            fp = qb * ep / rp
            # d/dR (e^{iwR}/R) / R
            gm = qb * em * (1j * omega * rm - 1.0) / rm ** 3
            gp = qb * ep * (1j * omega * rp - 1.0) / rp ** 3
        else:
            fm = qb / rm
            fp = qb / rp
            gm = -qb / rm ** 3
            gp = -qb / rp ** 3
        val += (fm - fp).sum(axis=1)
        grad[:, 0] += (gm * dm - gp * dp).sum(axis=1)
        gdiff = (gm - gp).sum(axis=1)
        grad[:, 1] += gdiff * pts[:, 1]
        grad[:, 2] += gdiff * pts[:, 2]
    scale = -1.0 / (4.0 * math.pi * seq.Q)
    return val * scale, grad * scale


def _pack(x, val, grad) -> FieldSample:
    if np.asarray(x).ndim == 1:
        return FieldSample(complex(val[0]), grad[0].astype(complex))
    return FieldSample(val.astype(complex), grad.astype(complex))


def eval_h0(seq: ChargeSequence, x) -> FieldSample:
    """Static singular function and its analytic gradient at ``x``.

    ``x`` may be one point (3,) or a batch (n, 3).
    """
    val, grad = _sum_fields(seq, x, 0.0)
    return _pack(x, val, grad)


def eval_h_omega(seq: ChargeSequence, omega: float, x) -> FieldSample:
    """Helmholtz counterpart of :func:`eval_h0` (identical at ``omega = 0``)."""
    if omega < 0:
        raise DomainError(f"omega must be non-negative, got {omega}")
    val, grad = _sum_fields(seq, x, float(omega))
    return _pack(x, val, grad)


def eval_g_omega(seq: ChargeSequence, omega: float, x) -> FieldSample:
    """``g_omega = h_omega - h0``."""
    a = eval_h_omega(seq, omega, x)
    b = eval_h0(seq, x)
    return FieldSample(a.value - b.value, a.gradient - b.gradient)


def boundary_constants(pair: InclusionPair, seq: ChargeSequence) -> BoundaryConstants:
    """``C_j = (-1)^j / (4 pi r Q)``."""
    if seq.pair is not pair and seq.pair.as_dict() != pair.as_dict():
        raise DomainError("sequence was built for a different pair")
    c = 1.0 / (4.0 * math.pi * pair.radius * seq.Q)
    return BoundaryConstants(-c, c)


def normal_derivative(seq: ChargeSequence, grid) -> np.ndarray:
    """Exterior normal derivative of h0 at the nodes of a sphere grid."""
    g = _sum_fields(seq, grid.nodes, 0.0)[1]
    return np.einsum("ij,ij->i", g, grid.normals)


def flux_integral(seq: ChargeSequence, pair: InclusionPair, which: int,
                  quad_order: int) -> float:
    """Quadrature of the outward normal derivative of h0 over one sphere.

    Converges to +1 for B1 and -1 for B2.
    """
    if quad_order < 8:
        raise DomainError(f"quad_order must be >= 8, got {quad_order}")
    grid = make_grid(pair, which, quad_order)
    return float(grid.integrate(normal_derivative(seq, grid)))


def sup_gradient_on_gap(seq: ChargeSequence, pair: InclusionPair, omega: float = 0.0,
                        n_samples: int = 2001) -> tuple[np.ndarray, float]:
    """Maximize ``|grad h_omega|`` over the gap segment ``{(t, 0, 0): |t| <= eps}``.

    Dense sampling locates the best bracket, a bounded Brent search refines
    it. The supremum over the open segment is attained in the limit at its
    ends, which lie on the spheres, so the closed segment is searched.
    """
    check_quasi_static(pair, omega)
    e = pair.epsilon
    t = np.linspace(-e, e, n_samples)

    def mag(tt):
        pts = np.zeros((np.size(tt), 3))
        pts[:, 0] = tt
        return eval_h_omega(seq, omega, pts).grad_norm

    m = mag(t)
    k = int(np.argmax(m))
    best_t, best = float(t[k]), float(m[k])
    lo, hi = t[max(k - 1, 0)], t[min(k + 1, n_samples - 1)]
    if hi > lo:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = minimize_scalar(lambda s: -float(mag(np.array([s]))[0]),
                                  bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-12 * max(e, 1e-300)})
        if -res.fun > best:
            best_t, best = float(res.x), float(-res.fun)
    return np.array([best_t, 0.0, 0.0]), best


def write_field_csv(path, points, sample: FieldSample) -> None:
    """Write ``x1,x2,x3,re_value,im_value,grad_norm`` rows."""
    pts = as_points(points)
    vals = np.atleast_1d(sample.value)
    norms = np.atleast_1d(sample.grad_norm)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "x2", "x3", "re_value", "im_value", "grad_norm"])
        for p, v, g in zip(pts, vals, norms):
            w.writerow([repr(float(p[0])), repr(float(p[1])), repr(float(p[2])),
                        repr(float(np.real(v))), repr(float(np.imag(v))), repr(float(g))])
