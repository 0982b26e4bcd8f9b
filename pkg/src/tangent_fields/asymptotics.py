"""Quantitative consequences of the image-charge construction.

The potential difference between the two inclusions splits into a static
part, a series over the image charges, and a frequency part
``omega^2 int_{B1 u B2} h0 u^i``. These feed the leading-order gradient
estimate, the frequency thresholds and the blowup classification.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import linregress

from .errors import AccuracyError, DomainError, UndefinedCoefficientError
from .geometry import InclusionPair, QUASI_STATIC_LIMIT
from .image_charges import ChargeSequence
from .incident import IncidentField
from .quadrature import ball_grid, newton_potential_ball
from .singular_fields import boundary_constants, sup_gradient_on_gap

VOLUME_SETTLE = 5e-3  # accept when the relative change drops below this
VOLUME_FAIL = 1e-2  # give up when the last change is still above this
VOLUME_CHARGE_TOL = 1e-7  # relative tail of the charges kept in volume sums
STATIC_ZERO_TOL = 1e-10


def _axis_points(c: np.ndarray) -> np.ndarray:
    pts = np.zeros((c.size, 3))
    pts[:, 0] = c
    return pts


def _fsum_complex(v: np.ndarray) -> complex:
    return complex(math.fsum(np.real(v)), math.fsum(np.imag(v)))


def static_part(seq: ChargeSequence, u_inc: IncidentField) -> complex:
    """``(1/Q) sum_n q_n (u^i(c_n) - u^i(-c_n))`` with compensated summation."""
    up = u_inc.value(_axis_points(seq.c_n))
    um = u_inc.value(_axis_points(-seq.c_n))
    return _fsum_complex(seq.q_n * (up - um)) / seq.Q


def static_part_bound(seq: ChargeSequence, u_inc: IncidentField) -> float:
    """Bound on the truncated remainder of :func:`static_part`.

    Uses ``|u(c) - u(-c)| <= 2 c sup|d_1 u|`` on the segment of image points.
    """
    pts = _axis_points(np.linspace(-seq.pair.c0, seq.pair.c0, 65))
    g = float(np.abs(u_inc.gradient(pts)[:, 0]).max())
    return 2.0 * float(seq.c_n[-1]) * g * seq.tail_bound / seq.Q


# ---------------------------------------------------------------------------
# volume integrals

@dataclass(frozen=True)
class VolumeIntegral:
    value: complex
    rel_change: float
    levels: tuple
    advisory: bool


def _ball_sum(nodes, weights, u_nodes, charges, u_charges):
    """``sum_p int_B (u(x) - u(p)) / |x - p| dx`` per charge p (vector)."""
    out = np.zeros(charges.shape[0], dtype=complex)
    step = max(1, 4_000_000 // max(nodes.shape[0], 1))
    for s in range(0, charges.shape[0], step):
        P = charges[s:s + step]
        d = nodes[:, None, :] - P[None, :, :]
        R = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
        R = np.where(R == 0.0, np.inf, R)
        diff = u_nodes[:, None] - u_charges[s:s + step][None, :]
        out[s:s + step] = (weights[:, None] * diff / R).sum(axis=0)
    return out


def _mirror(x: np.ndarray) -> np.ndarray:
    m = x.copy()
    m[:, 0] = -m[:, 0]
    return m


def _h0u_integral(seq: ChargeSequence, u_inc: IncidentField, n_radial: int,
                  order: int) -> complex:
    """``h0`` is odd under ``x1 -> -x1`` and B2 mirrors B1, so the integral
    over both balls equals ``int_{B1} h0(x) (u(x) - u(Mx)) dx``."""
    pair = seq.pair
    r = pair.radius
    center = pair.center_plus
    g = ball_grid(center, r, n_radial, order, axis_sign=-1.0)
    du = u_inc.value(g.nodes) - u_inc.value(_mirror(g.nodes))
    if not np.any(du):
        return 0j
    short = seq.truncated(VOLUME_CHARGE_TOL) if seq.rel_tol < VOLUME_CHARGE_TOL else seq
    c, q = short.c_n, short.q_n
    plus, minus = _axis_points(c), _axis_points(-c)
    d_plus = u_inc.value(plus) - u_inc.value(minus)
    d_minus = -d_plus
    Ip = _ball_sum(g.nodes, g.weights, du, plus, d_plus) \
        + d_plus * newton_potential_ball(plus, center, r)
    Im = _ball_sum(g.nodes, g.weights, du, minus, d_minus) \
        + d_minus * newton_potential_ball(minus, center, r)
    return -_fsum_complex(q * (Ip - Im)) / (4.0 * math.pi * seq.Q)


def h0u_volume_integral(seq: ChargeSequence, u_inc: IncidentField,
                        vol_quad_order: int = 16, max_levels: int = 4) -> VolumeIntegral:
    """``int_{B1 u B2} h0 u^i dx`` with the near-singular part of every
    image monopole subtracted and integrated exactly.

    The product rule (radial Gauss-Legendre x sphere grid) is refined by
    factors of 1.5 until the relative change drops below 0.5%. If the last
    change still exceeds 1% an :class:`AccuracyError` is raised; between the
    two the value is returned flagged advisory.
    """
    if vol_quad_order < 4:
        raise DomainError("vol_quad_order must be >= 4")
    n = int(vol_quad_order)
    prev = _h0u_integral(seq, u_inc, n, n)
    levels = [n]
    change = math.inf
    for _ in range(max_levels):
        n = int(math.ceil(1.5 * n))
        cur = _h0u_integral(seq, u_inc, n, n)
        levels.append(n)
        scale = max(abs(cur), abs(prev))
        # an integral that vanishes by symmetry settles in absolute terms
        floor = 1e-12 * _abs_scale(seq, u_inc)
        change = 0.0 if scale <= floor else abs(cur - prev) / scale
        prev = cur
        if change < VOLUME_SETTLE:
            return VolumeIntegral(cur, change, tuple(levels), False)
    if change > VOLUME_FAIL:
        raise AccuracyError(f"volume quadrature did not settle: relative change {change:.3g}")
    return VolumeIntegral(prev, change, tuple(levels), True)


def _abs_scale(seq: ChargeSequence, u_inc: IncidentField) -> float:
    """Rough size of ``int |h0 u|`` used as an absolute floor."""
    r = seq.radius
    pts = np.array([seq.pair.center_plus, seq.pair.center_minus])
    umax = float(np.abs(u_inc.value(pts)).max()) + 1.0
    return umax * (4.0 * math.pi * r ** 3 / 3.0) / (4.0 * math.pi * r * seq.Q) * 2.0


@dataclass(frozen=True)
class LambdaDecomposition:
    """``lambda1 - lambda2 = static_part + freq_part`` up to ``remainder_scale``."""

    static_part: complex
    freq_part: complex
    remainder_scale: float
    total: complex
    omega: float
    int_h0u: complex
    quad_change: float
    advisory: bool
    coefficient_A: complex | None = None

    def envelope(self) -> float:
        """Upper bound on ``|lambda1 - lambda2|`` including the band."""
        return abs(self.static_part) + abs(self.freq_part) + self.remainder_scale


def remainder_scale(seq: ChargeSequence, omega: float) -> float:
    """``(1/(4 pi r Q) + 1) omega^2`` with unit constants."""
    return (1.0 / (4.0 * math.pi * seq.radius * seq.Q) + 1.0) * omega * omega


def _check_omega(pair: InclusionPair, omega: float) -> None:
    if omega < 0:
        raise DomainError("omega must be non-negative")
    if omega * pair.radius > QUASI_STATIC_LIMIT * (1.0 + 1e-12):
        raise DomainError(f"omega*r = {omega * pair.radius:.3g} exceeds the quasi-static "
                          f"limit {QUASI_STATIC_LIMIT}")


def _int_u(pair: InclusionPair, u_inc: IncidentField) -> complex:
    return (u_inc.ball_integral(pair.center_plus, pair.radius)
            + u_inc.ball_integral(pair.center_minus, pair.radius))


def _int_u_tol(pair: InclusionPair, u_inc: IncidentField) -> float:
    pts = np.array([pair.center_plus, pair.center_minus])
    scale = float(np.abs(u_inc.value(pts)).max()) + 1.0
    return 1e-12 * scale * 8.0 * math.pi * pair.radius ** 3 / 3.0


def lambda_difference(seq: ChargeSequence, pair: InclusionPair, omega: float,
                      u_inc: IncidentField, vol_quad_order: int = 16) -> LambdaDecomposition:
    """Decompose ``lambda1 - lambda2`` into static and frequency parts."""
    _check_omega(pair, omega)
    st = static_part(seq, u_inc)
    if omega == 0.0:
        vi = VolumeIntegral(0j, 0.0, (), False)
    else:
        vi = h0u_volume_integral(seq, u_inc, vol_quad_order)
    fq = omega * omega * vi.value
    iu = _int_u(pair, u_inc)
    A = None
    if omega != 0.0 and abs(iu) > _int_u_tol(pair, u_inc):
        A = pair.radius * 4.0 * math.pi * seq.Q * vi.value / iu
    return LambdaDecomposition(st, fq, remainder_scale(seq, omega), st + fq, float(omega),
                               vi.value, vi.rel_change, vi.advisory, A)


def coefficient_A(seq: ChargeSequence, pair: InclusionPair, u_inc: IncidentField,
                  vol_quad_order: int = 16) -> complex:
    """``A = r sum_n q_n int u^i (1/|x + c_n| - 1/|x - c_n|) / int u^i``,
    i.e. ``4 pi r Q int h0 u^i / int u^i``.

    Raises :class:`UndefinedCoefficientError` when ``int u^i`` vanishes.
    """
    iu = _int_u(pair, u_inc)
    if abs(iu) <= _int_u_tol(pair, u_inc):
        raise UndefinedCoefficientError(
            "int u^i over the inclusions vanishes: A is undefined; use freq_part directly")
    vi = h0u_volume_integral(seq, u_inc, vol_quad_order)
    return complex(pair.radius * 4.0 * math.pi * seq.Q * vi.value / iu)


# ---------------------------------------------------------------------------
# the gradient estimate

class BlowupRegime(enum.Enum):
    STATIC_BLOWUP = "StaticBlowup"
    FREQUENCY_BLOWUP = "FrequencyBlowup"
    BOUNDED = "Bounded"


@dataclass(frozen=True)
class TheoremEstimate:
    """Leading-order scale and the separately reported ``O(omega^2)`` band."""

    predicted_scale: float
    band: float
    prefactor: float
    bracket: complex
    bounded: bool


def _blowup_prefactor(pair: InclusionPair) -> float:
    e, a = pair.epsilon, pair.alpha
    return pair.r_star / (e ** (1.0 - a) * (1.0 - a) * abs(math.log(e)))


def theorem_estimate(pair: InclusionPair, seq: ChargeSequence, omega: float,
                     u_inc: IncidentField, vol_quad_order: int = 16,
                     decomposition: LambdaDecomposition | None = None) -> TheoremEstimate:
    """``r*/(eps^{1-a}(1-a)|ln eps|) * |d_1 u^i(x*) M + A w^2/(4 pi r^2) int u^i|``.

    The bracket is realized from the series: ``d_1 u^i(x*) M`` as
    ``static * Q / (2 r)`` and ``A w^2 int u^i / (4 pi r^2)`` as
    ``freq * Q / r``. The ``(1/(4 pi r^2) + Q/r) w^2`` band (unit constant)
    is returned separately. For alpha >= 1 the field stays bounded and the
    scale is the incident gradient at the origin.
    """
    if pair.alpha >= 1.0:
        g = u_inc.gradient(np.zeros(3))[0]
        return TheoremEstimate(float(np.linalg.norm(np.abs(g))), 0.0, 1.0, 0j, True)
    dec = decomposition or lambda_difference(seq, pair, omega, u_inc, vol_quad_order)
    r, Q = pair.radius, seq.Q
    bracket = dec.static_part * Q / (2.0 * r) + dec.freq_part * Q / r
    pre = _blowup_prefactor(pair)
    band = pre * (1.0 / (4.0 * math.pi * r * r) + Q / r) * omega * omega
    return TheoremEstimate(pre * abs(bracket), band, pre, bracket, False)


def frequency_thresholds(pair: InclusionPair, seq: ChargeSequence, A: complex) -> tuple[float, float]:
    """``(C_a eps^{(1+a)/2}, C_b eps^{(1+a)/2} Q^{1/2})`` with
    ``C_a = 2 sqrt(pi r* Q / A)`` and ``C_b = 2 sqrt(pi r*)``.

    ``C_a`` needs ``Re A > 0``; otherwise the first threshold is NaN.
    """
    s = pair.epsilon ** (0.5 * (1.0 + pair.alpha))
    ca = (2.0 * math.sqrt(math.pi * pair.r_star * seq.Q / A.real)
          if A is not None and np.isfinite(A.real) and A.real > 0 else math.nan)
    if A is not None and math.isinf(A.real) and A.real > 0:
        ca = 0.0
    cb = 2.0 * math.sqrt(math.pi * pair.r_star)
    return ca * s, cb * s * math.sqrt(seq.Q)


def threshold_constants(pair: InclusionPair, seq: ChargeSequence, A) -> tuple[float, float]:
    s = pair.epsilon ** (0.5 * (1.0 + pair.alpha))
    ta, tb = frequency_thresholds(pair, seq, A)
    return ta / s, tb / (s * math.sqrt(seq.Q))


def reconstructed_gap_gradient(seq: ChargeSequence, pair: InclusionPair, omega: float,
                               u_inc: IncidentField, envelope: bool = True,
                               vol_quad_order: int = 16,
                               decomposition: LambdaDecomposition | None = None) -> float:
    """``|a| sup_gap |grad h_omega|`` with ``a = (lambda1 - lambda2)/(C1 - C2)``.

    With ``envelope=True`` the potential difference is replaced by its upper
    bound ``|static| + |freq| + band``, which is what the gradient estimate
    controls when the decomposed parts vanish.
    """
    dec = decomposition or lambda_difference(seq, pair, omega, u_inc, vol_quad_order)
    bc = boundary_constants(pair, seq)
    lam = dec.envelope() if envelope else abs(dec.total)
    a = lam / abs(bc.difference)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        _, g = sup_gradient_on_gap(seq, pair, omega)
    return a * g


@dataclass(frozen=True)
class BlowupReport:
    regime: BlowupRegime
    predicted_scale: float
    measured_scale: float
    thresholds: tuple
    decision: dict = field(default_factory=dict)


def classify_blowup(pair: InclusionPair, seq: ChargeSequence, omega: float,
                    u_inc: IncidentField, zero_tol: float = STATIC_ZERO_TOL,
                    vol_quad_order: int = 16) -> BlowupReport:
    """Static blowup if the static part is non-negligible; frequency blowup
    if it vanishes but omega exceeds the applicable threshold; bounded
    otherwise or for alpha >= 1.

    "Negligible" means ``|static| < zero_tol * (1 + max |u^i|)`` over the
    image points. The C_a threshold applies when ``Re A > 0``; otherwise the
    C_b threshold does, which for alpha = 0 is taken as ``eps^{1/2}``.
    """
    if pair.alpha >= 1.0:
        est = theorem_estimate(pair, seq, omega, u_inc)
        return BlowupReport(BlowupRegime.BOUNDED, est.predicted_scale, est.predicted_scale,
                            (math.nan, math.nan), {"rule": "alpha >= 1"})
    dec = lambda_difference(seq, pair, omega, u_inc, vol_quad_order)
    est = theorem_estimate(pair, seq, omega, u_inc, vol_quad_order, dec)
    st = dec.static_part
    pts = _axis_points(np.concatenate([seq.c_n, -seq.c_n]))
    u_scale = float(np.abs(u_inc.value(pts)).max())
    floor = zero_tol * (1.0 + u_scale)
    A = dec.coefficient_A
    ta, tb = frequency_thresholds(pair, seq, A)
    decision = {"static_abs": abs(st), "static_floor": floor, "omega": omega,
                "A": None if A is None else [A.real, A.imag]}
    if abs(st) >= floor:
        regime = BlowupRegime.STATIC_BLOWUP
        decision["rule"] = "|static| >= floor"
    else:
        if math.isfinite(ta):
            thr, name = ta, "C_a"
        elif pair.alpha == 0.0:
            thr, name = math.sqrt(pair.epsilon), "eps^(1/2)"
        else:
            thr, name = tb, "C_b"
        decision.update({"threshold": thr, "threshold_kind": name})
        if omega > thr:
            regime = BlowupRegime.FREQUENCY_BLOWUP
            decision["rule"] = f"static negligible and omega > {name} threshold"
        else:
            regime = BlowupRegime.BOUNDED
            decision["rule"] = f"static negligible and omega <= {name} threshold"
    measured = reconstructed_gap_gradient(seq, pair, omega, u_inc, True, vol_quad_order, dec)
    return BlowupReport(regime, est.predicted_scale, measured, (ta, tb), decision)


# ---------------------------------------------------------------------------
# rate fits

class FitModel(enum.Enum):
    PURE_POWER = "PurePower"
    POWER_OVER_LOG = "PowerOverLog"


@dataclass(frozen=True)
class RateFit:
    samples: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    model: FitModel


def fit_power_law(samples, model: FitModel | str = FitModel.PURE_POWER) -> RateFit:
    """Least squares of ``ln v`` (or ``ln(v |ln eps|)``) against ``ln eps``."""
    model = FitModel(model) if not isinstance(model, FitModel) else model
    s = np.asarray(samples, dtype=float)
    if s.ndim != 2 or s.shape[1] != 2:
        raise DomainError("samples must be an array of (epsilon, value) pairs")
    if s.shape[0] < 4:
        raise DomainError("at least 4 samples are required")
    eps, val = s[:, 0], s[:, 1]
    if np.any(eps <= 0) or np.any(val <= 0):
        raise DomainError("epsilon and values must be positive")
    if math.log10(eps.max() / eps.min()) < 2.0 - 1e-9:
        raise DomainError("samples must span at least two decades of epsilon")
    x = np.log(eps)
    y = np.log(val)
    if model is FitModel.POWER_OVER_LOG:
        if np.any(eps >= 1.0):
            raise DomainError("PowerOverLog needs epsilon < 1")
        y = y + np.log(np.abs(np.log(eps)))
    res = linregress(x, y)
    r2 = min(max(float(res.rvalue) ** 2, 0.0), 1.0)
    s.setflags(write=False)
    return RateFit(s, float(res.slope), float(res.intercept), r2, model)


def q_log_slope(eps_values, Q_values) -> RateFit:
    """Regression of ``Q`` against ``|ln eps|`` (slope ``(1 - alpha)/2``)."""
    e = np.asarray(eps_values, dtype=float)
    q = np.asarray(Q_values, dtype=float)
    res = linregress(np.abs(np.log(e)), q)
    return RateFit(np.column_stack([e, q]), float(res.slope), float(res.intercept),
                   float(res.rvalue) ** 2, FitModel.PURE_POWER)
