"""Nyström discretization of layer potentials on the sphere pair.

Kernel convention: ``Gamma_w(x) = -exp(i w |x|) / (4 pi |x|)``. The
single-layer operator ``S^w`` and the Neumann-Poincare operator ``K^{w,*}``
act on densities living on both spheres. Self-sphere blocks use singularity
subtraction against the closed-form action on constants,

    S[psi](x_i) = sum_{j != i} w_j G_ij (psi_j - psi_i) + psi_i S[1](x_i),

so the calibration identities ``S^0[1] = -r`` and ``K^{0,*}[1] = 1/2`` hold
to rounding. Cross-sphere blocks use plain product quadrature.
"""

from __future__ import annotations

import cmath
import csv
import math
import struct
import warnings
from dataclasses import dataclass, field
from math import factorial

import numpy as np
from numpy.polynomial.legendre import legval
from scipy.integrate import quad_vec
from scipy.interpolate import BarycentricInterpolator
from scipy.linalg import lu_factor, lu_solve
from scipy.linalg.lapack import get_lapack_funcs

from .errors import DomainError, NearSingularWarning, SolverError
from .geometry import InclusionPair, as_points
from .incident import IncidentField
from .quadrature import SphereGrid, make_grid, pole_grid, sphere_grid

COND_LIMIT = 1e12
_ROWS = 256


# ---------------------------------------------------------------------------
# closed-form self integrals over a sphere of radius r (target on the sphere)

def _phase_ratio(z: complex) -> complex:
    """``(exp(z) - 1) / z`` without cancellation for small ``|z|``."""
    if abs(z) < 0.1:
        term, total = 1.0 + 0j, 0j
        for k in range(1, 30):
            total += term
            term *= z / (k + 1)
        return total
    return (cmath.exp(z) - 1.0) / z


def self_S1(r: float, omega: float) -> complex:
    """``S^w[1]`` on its own sphere: ``-(exp(2iwr) - 1) / (2iw)``."""
    return -r * _phase_ratio(2j * omega * r)


def self_K1(r: float, omega: float) -> complex:
    """``K^{w,*}[1]`` on its own sphere."""
    e = cmath.exp(2j * omega * r)
    return (2.0 * 2.0 * r * _phase_ratio(2j * omega * r) - 2.0 * r * e) / (4.0 * r)


def self_S_series(r: float, j: int) -> complex:
    return -(1j ** j) / (2.0 * factorial(j)) * (2.0 * r) ** (j + 1) / (j + 1)


def self_K_series(r: float, j: int) -> complex:
    if j == 0:
        return 0.5
    return -(1j ** j) * (j - 1) / (4.0 * r * factorial(j)) * (2.0 * r) ** (j + 1) / (j + 1)


# ---------------------------------------------------------------------------
# kernels; R = |x - y| and dot = (x - y) . nu_x

def _s_kernel(R, omega):
    if omega == 0.0:
        return -1.0 / (4.0 * math.pi * R)
    return -np.exp(1j * omega * R) / (4.0 * math.pi * R)


def _k_kernel(R, dot, omega):
    if omega == 0.0:
        return dot / (4.0 * math.pi * R ** 3)
    return np.exp(1j * omega * R) * (1.0 - 1j * omega * R) * dot / (4.0 * math.pi * R ** 3)


def _s_series_kernel(R, j):
    return -(1j ** j) / (4.0 * math.pi * factorial(j)) * R ** (j - 1)


def _k_series_kernel(R, dot, j):
    return -(1j ** j) * (j - 1) / (4.0 * math.pi * factorial(j)) * R ** (j - 3) * dot


def _distances(xt, xs):
    d = xt[:, None, :] - xs[None, :, :]
    return d, np.sqrt(np.einsum("ijk,ijk->ij", d, d))


@dataclass(frozen=True)
class _KernelSpec:
    kind: str  # "S" or "K"
    omega: float = 0.0
    j: int | None = None  # series term index

    def is_complex(self) -> bool:
        return self.j is not None or self.omega != 0.0

    def values(self, d, R, normals_t):
        if self.kind == "S":
            return _s_kernel(R, self.omega) if self.j is None else _s_series_kernel(R, self.j)
        dot = np.einsum("ijk,ik->ij", d, normals_t)
        return _k_kernel(R, dot, self.omega) if self.j is None else _k_series_kernel(R, dot, self.j)

    def self_constant(self, r):
        if self.kind == "S":
            return self_S1(r, self.omega) if self.j is None else self_S_series(r, self.j)
        return self_K1(r, self.omega) if self.j is None else self_K_series(r, self.j)


def _block(spec: _KernelSpec, gt: SphereGrid, gs: SphereGrid, same: bool) -> np.ndarray:
    nt, ns = gt.size, gs.size
    dtype = complex if spec.is_complex() else float
    out = np.empty((nt, ns), dtype=dtype)
    for a in range(0, nt, _ROWS):
        b = min(a + _ROWS, nt)
        d, R = _distances(gt.nodes[a:b], gs.nodes)
        if same:
            idx = np.arange(a, b)
            R[idx - a, idx] = 1.0
        blk = spec.values(d, R, gt.normals[a:b]) * gs.weights[None, :]
        if same:
            blk[idx - a, idx] = 0.0
            c = spec.self_constant(gt.radius)
            blk[idx - a, idx] = (c if spec.is_complex() else c.real) - blk.sum(axis=1)
        out[a:b] = blk
    return out


def _assemble(spec: _KernelSpec, grids) -> np.ndarray:
    rows = [np.hstack([_block(spec, gt, gs, gt is gs) for gs in grids]) for gt in grids]
    return np.vstack(rows)


# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DensityPair:
    """Densities on the B1 and B2 grids."""

    phi1: np.ndarray
    phi2: np.ndarray

    def __post_init__(self):
        for a in (self.phi1, self.phi2):
            a.setflags(write=False)

    @classmethod
    def split(cls, v: np.ndarray, n1: int) -> "DensityPair":
        return cls(np.array(v[:n1]), np.array(v[n1:]))

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.phi1, self.phi2])


@dataclass(frozen=True, eq=False)
class OperatorSet:
    """Assembled ``S`` and ``K*`` over both spheres plus diagnostics."""

    S: np.ndarray
    K: np.ndarray
    omega: float
    grids: tuple
    metadata: dict = field(default_factory=dict)


def local_mesh_width(grid: SphereGrid) -> float:
    """Largest node spacing, ``pi r / order``."""
    return math.pi * grid.radius / grid.order


def _pair_gap(g1: SphereGrid, g2: SphereGrid) -> float:
    return float(np.linalg.norm(g1.center - g2.center)) - g1.radius - g2.radius


def assemble_operators(grid1: SphereGrid, grid2: SphereGrid, omega: float) -> OperatorSet:
    """``S^w`` and ``K^{w,*}`` over the union of both grids.

    Row blocks are (B1 targets, B2 targets); same for columns.
    """
    if grid1 is grid2 or np.allclose(grid1.center, grid2.center):
        raise DomainError("grids must live on distinct spheres")
    if omega < 0:
        raise DomainError("omega must be non-negative")
    grids = (grid1, grid2)
    S = _assemble(_KernelSpec("S", float(omega)), grids)
    K = _assemble(_KernelSpec("K", float(omega)), grids)
    gap = _pair_gap(grid1, grid2)
    # the relevant width is the spacing at the facing poles
    h = max(grid1.pole_spacing(), grid2.pole_spacing())
    near = gap < 2.0 * h
    meta = {"gap": gap, "pole_spacing": h, "near_singular": bool(near),
            "n1": grid1.size, "n2": grid2.size}
    if near:
        warnings.warn(f"sphere gap {gap:.3g} is below two local mesh widths ({h:.3g}); "
                      "cross-sphere quadrature may be inaccurate", NearSingularWarning,
                      stacklevel=2)
    return OperatorSet(S, K, float(omega), grids, meta)


def assemble_series(kind: str, j: int, grid1: SphereGrid, grid2: SphereGrid) -> np.ndarray:
    """Matrix of the ``j``-th low-frequency term of ``S`` (``kind='S'``) or
    ``K*`` (``kind='K'``)."""
    if kind not in ("S", "K"):
        raise DomainError("kind must be 'S' or 'K'")
    if j < 0:
        raise DomainError("j must be non-negative")
    if j == 0:
        return _assemble(_KernelSpec(kind, 0.0), (grid1, grid2)).astype(complex)
    return _assemble(_KernelSpec(kind, 0.0, j), (grid1, grid2))


# ---------------------------------------------------------------------------
# evaluation at arbitrary points

def _on_surface(grid: SphereGrid, pts, tol=1e-12):
    return np.abs(np.linalg.norm(pts - grid.center, axis=1) - grid.radius) <= tol * grid.radius


def _apply_direct(spec: _KernelSpec, grid, density, pts):
    d, R = _distances(pts, grid.nodes)
    if spec.kind != "S":
        raise DomainError("direct evaluation supports the single layer only")
    return (spec.values(d, R, None) * grid.weights[None, :]) @ density


def _apply_on_surface(spec: _KernelSpec, grid, density, pts, normals=None):
    """Weakly singular self-sphere integral at arbitrary on-surface targets.

    The density is interpolated onto a product grid rotated to put the
    target at its pole, where the rule integrates ``1/|x - y|`` exactly.
    """
    order = grid.order + 8
    out = np.empty(pts.shape[0], dtype=complex)
    for i, x in enumerate(pts):
        y, _, w = pole_grid(grid.center, grid.radius, x, order)
        dens = grid.interpolate(density, y)
        d, R = _distances(x[None, :], y)
        nrm = None if normals is None else normals[i:i + 1]
        out[i] = (spec.values(d, R, nrm)[0] * w) @ dens
    return out


def uniform_single_layer(radius: float, omega: float, dist) -> np.ndarray:
    """``S^w[1]`` of a sphere at distance ``dist`` from its center.

    Outside: ``-r^2 j0(w r) exp(i w R) / R``; inside:
    ``-r exp(i w r) j0(w R)``, with ``j0(z) = sin(z) / z``.
    """
    R = np.asarray(dist, dtype=float)
    j0 = lambda z: np.sinc(z / math.pi)  # noqa: E731
    out = np.where(R >= radius,
                   -radius ** 2 * j0(omega * radius) * np.exp(1j * omega * R) / np.maximum(R, 1e-300),
                   -radius * np.exp(1j * omega * radius) * j0(omega * R))
    return out


def _apply_near(spec: _KernelSpec, grid, density, pts):
    """Single layer at targets close to (or on) the surface.

    With ``p`` the radial projection of ``x``, ``S[psi](x) = S[psi - psi(p)](x)
    + psi(p) S[1](x)``; the first integrand vanishes at the pole of a product
    rule centered at ``p``, where the near singularity lives.
    """
    order = max(grid.order + 8, 32)
    out = np.empty(pts.shape[0], dtype=complex)
    rel = pts - grid.center
    dist = np.linalg.norm(rel, axis=1)
    poles = grid.center + grid.radius * rel / dist[:, None]
    psi_p = grid.interpolate(density, poles)
    ones = uniform_single_layer(grid.radius, spec.omega, dist)
    for i, x in enumerate(pts):
        y, _, w = pole_grid(grid.center, grid.radius, poles[i], order)
        dens = grid.interpolate(density, y) - psi_p[i]
        d, R = _distances(x[None, :], y)
        R = np.maximum(R, 1e-300)
        out[i] = (spec.values(d, R, None)[0] * w) @ dens + psi_p[i] * ones[i]
    return out


def single_layer_apply(grid_src: SphereGrid, density, omega: float, x) -> np.ndarray:
    """``S^w[psi](x) = int Gamma_w(x - y) psi(y) ds(y)`` for targets ``x``.

    On-surface targets use a product rule rotated to put the target at its
    pole. Targets closer to the surface than one mesh width raise a
    :class:`NearSingularWarning` and are evaluated by subtracting the
    density value at the nearest surface point on such a rotated rule.
    """
    pts = as_points(x)
    density = np.asarray(density)
    spec = _KernelSpec("S", float(omega))
    out = np.zeros(pts.shape[0], dtype=complex)
    on = _on_surface(grid_src, pts)
    if on.any():
        out[on] = _apply_on_surface(spec, grid_src, density, pts[on])
    off = ~on
    if off.any():
        dist = np.abs(np.linalg.norm(pts[off] - grid_src.center, axis=1) - grid_src.radius)
        close = dist < local_mesh_width(grid_src)
        res = np.zeros(dist.size, dtype=complex)
        if (~close).any():
            res[~close] = _apply_direct(spec, grid_src, density, pts[off][~close])
        if close.any():
            warnings.warn("target within one mesh width of the surface; using a "
                          "target-centered subtraction rule", NearSingularWarning, stacklevel=2)
            res[close] = _apply_near(spec, grid_src, density, pts[off][close])
        out[off] = res
    return out


def series_term_S(j: int, grid: SphereGrid, density, x=None):
    """``S^j[psi]`` with kernel ``-i^j |x-y|^{j-1} / (4 pi j!)``.

    ``x=None`` evaluates at the grid's own nodes (subtraction quadrature);
    otherwise at the given points.
    """
    if j < 1:
        raise DomainError("series terms start at j = 1")
    density = np.asarray(density)
    spec = _KernelSpec("S", 0.0, j)
    if x is None:
        return _block(spec, grid, grid, True) @ density
    pts = as_points(x)
    d, R = _distances(pts, grid.nodes)
    return (spec.values(d, R, None) * grid.weights[None, :]) @ density


def series_term_K(j: int, grid: SphereGrid, density, x=None, normals=None):
    """``K^j[psi]`` with kernel ``-i^j (j-1) |x-y|^{j-3} (x-y).nu_x / (4 pi j!)``."""
    if j < 1:
        raise DomainError("series terms start at j = 1")
    density = np.asarray(density)
    spec = _KernelSpec("K", 0.0, j)
    if x is None:
        return _block(spec, grid, grid, True) @ density
    pts = as_points(x)
    nrm = as_points(normals)
    d, R = _distances(pts, grid.nodes)
    return (spec.values(d, R, nrm) * grid.weights[None, :]) @ density


def normal_trace(grid: SphereGrid, density, omega: float, x, side: int = 1) -> np.ndarray:
    """One-sided normal derivative ``(side/2) psi + K^{w,*}[psi]`` of the
    single layer at on-surface points ``x`` (``side=+1`` exterior, ``-1``
    interior), with the self integral on a target-centered product rule."""
    pts = as_points(x)
    if not np.all(_on_surface(grid, pts, 1e-10)):
        raise DomainError("trace points must lie on the sphere")
    density = np.asarray(density)
    nrm = (pts - grid.center) / grid.radius
    k = _k_apply_on_surface(grid, density, omega, pts, nrm)
    return 0.5 * side * grid.interpolate(density, pts) + k


def jump_residual(radius: float = 1.0, order: int = 24, n_check: int = 12,
                  degrees=(0, 1, 2, 3, 4), seed: int = 0) -> dict:
    """Static trace check on a random band-limited density.

    ``psi = sum_l a_l P_l(nu . d_l)`` with random axes ``d_l``; the single
    layer of a degree-l harmonic has traces ``(l+1)/(2l+1) psi_l`` (outside)
    and ``-l/(2l+1) psi_l`` (inside). Returns the largest deviations of both
    computed traces from these values and of their difference from ``psi``.
    """
    rng = np.random.default_rng(seed)
    grid = sphere_grid(np.zeros(3), radius, order)
    axes = rng.normal(size=(len(degrees), 3))
    axes /= np.linalg.norm(axes, axis=1)[:, None]
    amps = rng.normal(size=len(degrees))

    def parts(p):
        nu = p / radius
        return [a * legval(nu @ d, np.eye(l + 1)[l]) for l, a, d in zip(degrees, amps, axes)]

    psi = np.sum(parts(grid.nodes), axis=0)
    v = rng.normal(size=(n_check, 3))
    pts = radius * v / np.linalg.norm(v, axis=1)[:, None]
    comp = parts(pts)
    exact_out = sum((l + 1) / (2 * l + 1) * c for l, c in zip(degrees, comp))
    exact_in = sum(-l / (2 * l + 1) * c for l, c in zip(degrees, comp))
    t_out = normal_trace(grid, psi, 0.0, pts, +1)
    t_in = normal_trace(grid, psi, 0.0, pts, -1)
    scale = max(np.abs(np.sum(comp, axis=0)).max(), 1e-300)
    return {"exterior": float(np.abs(t_out - exact_out).max() / scale),
            "interior": float(np.abs(t_in - exact_in).max() / scale),
            "jump": float(np.abs(t_out - t_in - np.sum(comp, axis=0)).max() / scale)}


def axis_field(grid: SphereGrid, density, omega: float, t) -> tuple[np.ndarray, np.ndarray]:
    """Value and gradient of ``S^w[psi]`` at axis points ``(t, 0, 0)``.

    The azimuthal integral is exact on the trapezoid grid, which leaves a
    one-dimensional polar integral. It is evaluated adaptively on the
    barycentric interpolant of the ring profiles, so targets arbitrarily
    close to the surface are handled.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    f0, fc, fs = grid.azimuthal_modes(np.asarray(density))
    prof = np.stack([f0, fc, fs], axis=1).astype(complex)
    interp = BarycentricInterpolator(grid.theta, prof)
    r, c, s = grid.radius, grid.center[0], grid.axis_sign

    def integrand(theta, tt):
        F = interp(theta)
        y1 = c + s * r * math.cos(theta)
        rs = r * math.sin(theta)
        dx = tt - y1
        R = math.hypot(dx, rs)
        jac = r * r * math.sin(theta)
        if omega == 0.0:
            g0 = -1.0 / (4.0 * math.pi * R)
            dg = 1.0 / (4.0 * math.pi * R ** 3)  # grad Gamma = dg * (x - y)
        else:
            e = cmath.exp(1j * omega * R)
            g0 = -e / (4.0 * math.pi * R)
            dg = -e * (1j * omega * R - 1.0) / (4.0 * math.pi * R ** 3)
        # (x - y) = (dx, -rs cos(phi), -rs sin(phi) * s); the frame's third
        # axis carries the grid's axis sign
        return jac * np.array([g0 * F[0], dg * dx * F[0], -dg * rs * F[1],
                               -dg * rs * s * F[2]])

    vals = np.empty(t.size, dtype=complex)
    grads = np.empty((t.size, 3), dtype=complex)
    for i, tt in enumerate(t):
        res, _ = quad_vec(lambda th: integrand(th, tt), 0.0, math.pi, epsabs=1e-13,
                          epsrel=1e-11, points=[0.0, 1e-3, 1e-2, 1e-1], limit=2000)
        vals[i] = res[0]
        grads[i] = res[1:]
    return vals, grads


# ---------------------------------------------------------------------------
# dense solves

def _factor(A: np.ndarray):
    """LU factorization plus a 1-norm condition estimate."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu, piv = lu_factor(A, check_finite=True)
    if np.any(np.diag(lu) == 0):
        raise SolverError("singular system", math.inf)
    gecon = get_lapack_funcs("gecon", (lu,))
    anorm = float(np.abs(A).sum(axis=0).max())
    rcond, info = gecon(lu, anorm, norm="1")
    cond = math.inf if rcond == 0 else 1.0 / float(rcond)
    if not math.isfinite(cond) or cond > COND_LIMIT:
        raise SolverError(f"system condition estimate {cond:.3g} exceeds {COND_LIMIT:.0e}", cond)
    return (lu, piv), cond


@dataclass(frozen=True, eq=False)
class CapacitorSolution:
    """Static capacitor solve: ``u = u^i + S^0[phi]`` with ``u = lambda_j``
    on each sphere and zero flux."""

    pair: InclusionPair
    grids: tuple
    density: DensityPair
    lambda1: complex
    lambda2: complex
    u_inc: IncidentField
    condition: float
    residual: float

    @property
    def lambda_difference(self) -> complex:
        return self.lambda1 - self.lambda2

    def evaluate(self, x) -> np.ndarray:
        """Exterior field ``u^i + S^0[phi]`` at ``x``."""
        pts = as_points(x)
        v = self.u_inc.value(pts).astype(complex)
        for g, d in zip(self.grids, (self.density.phi1, self.density.phi2)):
            v = v + single_layer_apply(g, d, 0.0, pts)
        return v

    def axis_gradient(self, t, density: DensityPair | None = None,
                      include_incident: bool = True) -> np.ndarray:
        """Gradient of the field on the x1 axis, accurate up to the surfaces.

        ``density`` substitutes another density pair (for decompositions).
        """
        dens = self.density if density is None else density
        t = np.atleast_1d(np.asarray(t, dtype=float))
        g = np.zeros((t.size, 3), dtype=complex)
        for grid, d in zip(self.grids, (dens.phi1, dens.phi2)):
            g += axis_field(grid, d, 0.0, t)[1]
        if include_incident:
            pts = np.column_stack([t, np.zeros_like(t), np.zeros_like(t)])
            g += self.u_inc.gradient(pts)
        return g


def make_grids(pair: InclusionPair, order: int) -> tuple[SphereGrid, SphereGrid]:
    return make_grid(pair, 1, order), make_grid(pair, 2, order)


def solve_capacitor(pair: InclusionPair, grids, omega: float,
                    u_inc: IncidentField, operators: OperatorSet | None = None) -> CapacitorSolution:
    """Dense collocation solve of the static capacitor system.

    Unknowns are the density on both spheres and the two boundary constants;
    rows enforce ``u^i + S^0[phi] = lambda_j`` at every node and
    ``int phi = 0`` on each sphere (equivalent to zero flux, since
    ``(1/2 + K*)`` maps constants to constants and preserves the mean).
    """
    if omega != 0.0:
        raise DomainError("the capacitor solve is static; pass omega = 0")
    g1, g2 = grids
    ops = operators if operators is not None else assemble_operators(g1, g2, 0.0)
    n1, n = g1.size, g1.size + g2.size
    A = np.zeros((n + 2, n + 2))
    A[:n, :n] = ops.S.real
    A[:n1, n] = -1.0
    A[n1:n, n + 1] = -1.0
    A[n, :n1] = g1.weights
    A[n + 1, n1:n] = g2.weights
    nodes = np.vstack([g1.nodes, g2.nodes])
    ui = u_inc.value(nodes)
    rhs = np.zeros(n + 2, dtype=complex)
    rhs[:n] = -ui
    fac, cond = _factor(A)
    sol = lu_solve(fac, rhs.real) + 1j * lu_solve(fac, rhs.imag)
    res = float(np.abs(A @ sol - rhs).max() / max(np.abs(rhs).max(), 1e-300))
    return CapacitorSolution(pair, (g1, g2), DensityPair.split(sol[:n], n1),
                             complex(sol[n]), complex(sol[n + 1]), u_inc, cond, res)


@dataclass(frozen=True, eq=False)
class TransmissionSolution:
    """Exterior ``u = u^i + S^w[phi_ext]``; inside ball j,
    ``u = S^{k_c}_{dB_j}[phi_int]`` (own sphere only)."""

    pair: InclusionPair
    grids: tuple
    exterior: DensityPair
    interior: DensityPair
    omega: float
    k_c: float
    rho1: float
    kappa1: float
    u_inc: IncidentField
    condition: float
    residual: float

    def evaluate(self, x) -> np.ndarray:
        """Total field at exterior points."""
        pts = as_points(x)
        v = self.u_inc.value(pts).astype(complex)
        for g, d in zip(self.grids, (self.exterior.phi1, self.exterior.phi2)):
            v = v + single_layer_apply(g, d, self.omega, pts)
        return v

    def evaluate_interior(self, x) -> np.ndarray:
        """Total field at points inside either ball."""
        pts = as_points(x)
        v = np.full(pts.shape[0], np.nan, dtype=complex)
        for g, d in zip(self.grids, (self.interior.phi1, self.interior.phi2)):
            inside = np.linalg.norm(pts - g.center, axis=1) <= g.radius * (1 + 1e-12)
            if inside.any():
                v[inside] = single_layer_apply(g, d, self.k_c, pts[inside])
        return v

    def boundary_flux(self, which: int, operators: OperatorSet | None = None) -> complex:
        """``int_{dB_which} d_nu u|_+`` from the exterior trace."""
        g1, g2 = self.grids
        ops = operators or assemble_operators(g1, g2, self.omega)
        phi = self.exterior.stacked()
        nodes = np.vstack([g1.nodes, g2.nodes])
        normals = np.vstack([g1.normals, g2.normals])
        dn = (np.einsum("ij,ij->i", self.u_inc.gradient(nodes), normals)
              + 0.5 * phi + ops.K @ phi)
        n1 = g1.size
        if which == 1:
            return complex(g1.integrate(dn[:n1]))
        return complex(g2.integrate(dn[n1:]))

    def check_residuals(self, n_check: int = 16, seed: int = 0) -> dict:
        """Transmission conditions at random on-surface points off the
        collocation nodes; relative max residuals of continuity and flux."""
        rng = np.random.default_rng(seed)
        out = {"continuity": 0.0, "flux": 0.0}
        g1, g2 = self.grids
        for grid in self.grids:
            v = rng.normal(size=(n_check, 3))
            nrm = v / np.linalg.norm(v, axis=1)[:, None]
            pts = grid.center + grid.radius * nrm
            ue = self.u_inc.value(pts).astype(complex)
            ui = np.zeros(n_check, dtype=complex)
            dne = np.einsum("ij,ij->i", self.u_inc.gradient(pts), nrm)
            dni = np.zeros(n_check, dtype=complex)
            for gs, de, di in zip(self.grids, (self.exterior.phi1, self.exterior.phi2),
                                  (self.interior.phi1, self.interior.phi2)):
                ue += single_layer_apply(gs, de, self.omega, pts)
                if gs is grid:
                    ui += single_layer_apply(gs, di, self.k_c, pts)
                    dens_e = gs.interpolate(de, pts)
                    dens_i = gs.interpolate(di, pts)
                    dne += 0.5 * dens_e + _k_apply_on_surface(gs, de, self.omega, pts, nrm)
                    dni += -0.5 * dens_i + _k_apply_on_surface(gs, di, self.k_c, pts, nrm)
                else:
                    d, R = _distances(pts, gs.nodes)
                    kv = _k_kernel(R, np.einsum("ijk,ik->ij", d, nrm), self.omega)
                    dne += (kv * gs.weights) @ de
            scale_u = max(np.abs(ue).max(), 1e-300)
            scale_f = max(np.abs(self.rho1 * dne).max(), np.abs(dni).max(), 1e-300)
            out["continuity"] = max(out["continuity"], float(np.abs(ue - ui).max() / scale_u))
            out["flux"] = max(out["flux"], float(np.abs(self.rho1 * dne - dni).max() / scale_f))
        return out


def _k_apply_on_surface(grid, density, omega, pts, normals):
    return _apply_on_surface(_KernelSpec("K", float(omega)), grid, density, pts, normals)


def solve_transmission(pair: InclusionPair, grids, omega: float, rho1: float,
                       kappa1: float, u_inc: IncidentField) -> TransmissionSolution:
    """Dense solve of the block system

        [ -S^w               S^{k_c}        ] [phi_ext]   [ u^i             ]
        [ -rho1 (1/2 + K^w*)  -1/2 + K^{k_c}* ] [phi_int] = [ rho1 d_nu u^i  ]

    with ``k_c = omega sqrt(rho1 / kappa1)``.
    """
    if not (0.0 < rho1 <= 1.0):
        raise DomainError(f"rho1 must lie in (0, 1], got {rho1}")
    if rho1 > 0.1:
        warnings.warn("rho1 > 0.1 is outside the high-contrast regime", UserWarning, stacklevel=2)
    if kappa1 <= 0:
        raise DomainError("kappa1 must be positive")
    if omega < 0:
        raise DomainError("omega must be non-negative")
    g1, g2 = grids
    k_c = omega * math.sqrt(rho1 / kappa1)
    ext = assemble_operators(g1, g2, omega)
    n1, n = g1.size, g1.size + g2.size
    # the interior of each ball is represented by its own sphere only
    Si = np.zeros((n, n), dtype=complex)
    Ki = np.zeros((n, n), dtype=complex)
    for sl, g in ((slice(0, n1), g1), (slice(n1, n), g2)):
        Si[sl, sl] = _block(_KernelSpec("S", k_c), g, g, True)
        Ki[sl, sl] = _block(_KernelSpec("K", k_c), g, g, True)
    eye = np.eye(n)
    A = np.block([[-ext.S, Si],
                  [-rho1 * (0.5 * eye + ext.K), -0.5 * eye + Ki]]).astype(complex)
    nodes = np.vstack([g1.nodes, g2.nodes])
    normals = np.vstack([g1.normals, g2.normals])
    U = np.concatenate([u_inc.value(nodes),
                        rho1 * np.einsum("ij,ij->i", u_inc.gradient(nodes), normals)])
    fac, cond = _factor(A)
    sol = lu_solve(fac, U)
    res = float(np.abs(A @ sol - U).max() / max(np.abs(U).max(), 1e-300))
    return TransmissionSolution(pair, (g1, g2), DensityPair.split(sol[:n], n1),
                                DensityPair.split(sol[n:], n1), float(omega), k_c,
                                float(rho1), float(kappa1), u_inc, cond, res)


# ---------------------------------------------------------------------------
# serialization

MATRIX_MAGIC = b"TFMAT001"


def dump_matrix(path, A: np.ndarray) -> None:
    """Binary container: 8-byte magic, little-endian uint64 rows and cols,
    then row-major little-endian float64 (re, im) pairs."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2:
        raise DomainError("matrix must be two-dimensional")
    with open(path, "wb") as fh:
        fh.write(MATRIX_MAGIC)
        fh.write(struct.pack("<QQ", *A.shape))
        fh.write(np.ascontiguousarray(A).astype("<c16").tobytes())


def load_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.read(8) != MATRIX_MAGIC:
            raise DomainError("not a matrix container")
        rows, cols = struct.unpack("<QQ", fh.read(16))
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.size != rows * cols:
        raise DomainError("truncated matrix container")
    return data.reshape(rows, cols).astype(complex)


def write_density_csv(path, grids, density: DensityPair) -> None:
    """Rows ``sphere,x1,x2,x3,weight,re,im``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sphere", "x1", "x2", "x3", "weight", "re", "im"])
        for k, (g, d) in enumerate(zip(grids, (density.phi1, density.phi2)), start=1):
            for p, wt, v in zip(g.nodes, g.weights, d):
                w.writerow([k] + [repr(float(c)) for c in p]
                           + [repr(float(wt)), repr(float(np.real(v))), repr(float(np.imag(v)))])
