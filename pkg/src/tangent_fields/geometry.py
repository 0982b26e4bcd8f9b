"""Two equal balls separated by a gap of width 2*epsilon along the x1 axis.

Everything is dimensionless: background density and bulk modulus are both 1.
Points are plain ``numpy`` arrays of shape ``(3,)`` (or ``(n, 3)`` batches).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, QuasiStaticWarning, SingularityError

QUASI_STATIC_LIMIT = 0.1


def as_point(x) -> np.ndarray:
    """Return ``x`` as a finite float array of shape (3,)."""
    p = np.asarray(x, dtype=float).reshape(3)
    if not np.all(np.isfinite(p)):
        raise DomainError(f"point has non-finite components: {p}")
    return p


def as_points(x) -> np.ndarray:
    """Return ``x`` as a float array of shape (n, 3)."""
    p = np.asarray(x, dtype=float)
    if p.ndim == 1:
        p = p.reshape(1, 3)
    if p.ndim != 2 or p.shape[1] != 3:
        raise DomainError(f"expected points of shape (n, 3), got {p.shape}")
    return p


@dataclass(frozen=True, eq=False)
class InclusionPair:
    """Balls B1 (center at +x1) and B2 (center at -x1) of common radius
    ``r_star * epsilon**alpha`` whose surfaces are 2*epsilon apart."""

    r_star: float
    alpha: float
    epsilon: float
    radius: float = field(init=False)
    center_plus: np.ndarray = field(init=False, repr=False)
    center_minus: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (self.r_star > 0 and math.isfinite(self.r_star)):
            raise DomainError(f"r_star must be positive, got {self.r_star}")
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise DomainError(f"epsilon must be positive, got {self.epsilon}")
        if not math.isfinite(self.alpha):
            raise DomainError(f"alpha must be finite, got {self.alpha}")
        # exp/log form: alpha is a continuous sweep parameter, possibly negative
        r = self.r_star * math.exp(self.alpha * math.log(self.epsilon))
        c = np.array([r + self.epsilon, 0.0, 0.0])
        c.setflags(write=False)
        d = -c
        d.setflags(write=False)
        object.__setattr__(self, "radius", r)
        object.__setattr__(self, "center_plus", c)
        object.__setattr__(self, "center_minus", d)

    @property
    def c0(self) -> float:
        """Abscissa of the center of B1."""
        return self.radius + self.epsilon

    @property
    def limit_point(self) -> float:
        """Accumulation abscissa sqrt(eps^2 + 2 r eps) of the image points."""
        e = self.epsilon
        return math.sqrt(e * e + 2.0 * self.radius * e)

    def center(self, which: int) -> np.ndarray:
        if which == 1:
            return self.center_plus
        if which == 2:
            return self.center_minus
        raise DomainError(f"which must be 1 or 2, got {which}")

    def surface_gap(self) -> float:
        return float(np.linalg.norm(self.center_plus - self.center_minus)) - 2.0 * self.radius

    def as_dict(self) -> dict:
        return {"r_star": self.r_star, "alpha": self.alpha, "epsilon": self.epsilon,
                "radius": self.radius}


def make_pair(r_star: float, alpha: float, epsilon: float) -> InclusionPair:
    """Build the configuration for ``r = r_star * epsilon**alpha``.

    Whether the frequency is quasi-static cannot be judged here; callers that
    know omega should use :func:`check_quasi_static`.
    """
    return InclusionPair(float(r_star), float(alpha), float(epsilon))


def check_quasi_static(pair: InclusionPair, omega: float, limit: float = QUASI_STATIC_LIMIT) -> bool:
    """Warn and return False when ``omega * r`` exceeds ``limit``."""
    if omega * pair.radius > limit:
        warnings.warn(f"omega*r = {omega * pair.radius:.3g} exceeds {limit}; "
                      "the quasi-static expansions may not apply", QuasiStaticWarning,
                      stacklevel=2)
        return False
    return True


def _invert(x: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    d = x - center
    d2 = np.sum(d * d, axis=-1, keepdims=True)
    if np.any(d2 <= (1e-14 * radius) ** 2):
        raise SingularityError("inversion center requested")
    return radius * radius * d / d2 + center


def reflect(pair: InclusionPair, x, which: int = 2) -> np.ndarray:
    """Kelvin inversion in the sphere bounding B2 (default) or B1.

    ``R(x) = r^2 (x - d0) / |x - d0|^2 + d0``. Accepts a single point or an
    ``(n, 3)`` batch.
    """
    x = np.asarray(x, dtype=float)
    return _invert(x, pair.center(which), pair.radius)


@dataclass(frozen=True)
class EvalRegion:
    """Bounded region containing both balls, with standard sampling sets."""

    pair: InclusionPair
    bounding_radius: float

    def __post_init__(self):
        needed = 2.0 * self.pair.radius + self.pair.epsilon
        if not self.bounding_radius > needed:
            raise DomainError(f"bounding radius {self.bounding_radius} does not contain "
                              f"both balls (needs > {needed})")

    def gap_segment(self, n: int = 201, closed: bool = True) -> np.ndarray:
        """Points (t, 0, 0) with |t| <= eps (or < eps when ``closed`` is False)."""
        e = self.pair.epsilon
        t = np.linspace(-e, e, n if closed else n + 2)
        if not closed:
            t = t[1:-1]
        return np.column_stack([t, np.zeros_like(t), np.zeros_like(t)])

    def axis_ray(self, start: float, stop: float, n: int = 50,
                 direction=(1.0, 0.0, 0.0), log: bool = True) -> np.ndarray:
        d = as_point(direction)
        d = d / np.linalg.norm(d)
        s = np.geomspace(start, stop, n) if log else np.linspace(start, stop, n)
        return s[:, None] * d[None, :]

    def contains(self, x) -> np.ndarray:
        return np.linalg.norm(as_points(x), axis=1) < self.bounding_radius

    def exterior_mask(self, x) -> np.ndarray:
        p = as_points(x)
        r = self.pair.radius
        d1 = np.linalg.norm(p - self.pair.center_plus, axis=1)
        d2 = np.linalg.norm(p - self.pair.center_minus, axis=1)
        return (d1 >= r) & (d2 >= r)
