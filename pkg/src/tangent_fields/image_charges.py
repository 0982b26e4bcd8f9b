"""Image-point sequence, charge weights and their certified sums.

Repeated Kelvin inversion in the two spheres produces image points ``c_n``
inside B1 (mirrored to ``-c_n`` inside B2) carrying charges ``q_n``. The
charges decay at least geometrically with ratio ``rho_inf = r / (c0 + c)``,
which bounds the truncated remainder of every positive series over ``n``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError
from .geometry import InclusionPair

MAX_TERMS = 10_000_000
_CHUNK = 4096


class Regime(enum.Enum):
    SUBCRITICAL = "alpha<1"
    SUPERCRITICAL = "alpha>=1"


@dataclass(frozen=True)
class ScalingParams:
    """Normalized parameters of the image recursion.

    For alpha < 1 the points are measured in units of the radius
    (``p_n = c_n / r``, ``delta = eps / r``); for alpha >= 1 in units of
    the half-gap (``p_n = c_n / eps``, ``delta = r / eps``). ``growth_A`` is
    the contraction ratio of the Moebius recursion and ``p_limit`` its fixed
    point.
    """

    delta: float
    N: int
    p_limit: float
    growth_A: float
    one_plus_delta_minus_p: float
    regime: Regime
    scale: float  # length unit used for p_n

    @property
    def log_A(self) -> float:
        return math.log1p(2.0 * self.p_limit / self.one_plus_delta_minus_p)


def scaling_params(pair: InclusionPair) -> ScalingParams:
    r, e = pair.radius, pair.epsilon
    if pair.alpha < 1.0:
        delta = e / r
        p = math.sqrt(delta * delta + 2.0 * delta)
        # (1 + delta)^2 - p^2 = 1
        gap = 1.0 / (1.0 + delta + p)
        n_cut = int(math.floor(delta ** -0.5 * (1.0 + 1e-12)))
        regime, scale = Regime.SUBCRITICAL, r
    else:
        delta = r / e
        p = math.sqrt(1.0 + 2.0 * delta)
        # (1 + delta)^2 - p^2 = delta^2
        gap = delta * delta / (1.0 + delta + p)
        n_cut = 0
        regime, scale = Regime.SUPERCRITICAL, e
    growth = (1.0 + delta + p) / gap
    return ScalingParams(delta, n_cut, p, growth, gap, regime, scale)


def closed_form_pn(params: ScalingParams, n):
    """``p_n = p (2 / (A^{n+1} - 1) + 1)``; saturates to ``p`` on overflow.

    ``n`` may be an integer or an integer array.
    """
    n_arr = np.asarray(n)
    if np.any(n_arr < 0):
        raise DomainError("n must be non-negative")
    expo = (n_arr.astype(float) + 1.0) * params.log_A
    with np.errstate(over="ignore"):
        denom = np.expm1(expo)
    out = params.p_limit * (1.0 + 2.0 / denom)
    out = np.where(np.isfinite(denom), out, params.p_limit)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class ChargeSequence:
    """Truncated image sequence with a certified bound on the remainder of Q.

    The true Q lies in ``[Q, Q + tail_bound]``.
    """

    pair: InclusionPair
    c_n: np.ndarray = field(repr=False)
    rho_n: np.ndarray = field(repr=False)
    q_n: np.ndarray = field(repr=False)
    Q: float
    M: float
    n_terms: int
    tail_bound: float
    rho_inf: float
    rel_tol: float

    @property
    def radius(self) -> float:
        return self.pair.radius

    def p_n(self) -> np.ndarray:
        """Image abscissae in the regime's normalization (c_n/r or c_n/eps)."""
        return self.c_n / scaling_params(self.pair).scale

    def partial_Q(self) -> np.ndarray:
        return np.cumsum(self.q_n)

    def truncated(self, rel_tol: float) -> "ChargeSequence":
        """Shorter view whose certified remainder is below ``rel_tol * Q``."""
        ratio = self.rho_inf / (1.0 - self.rho_inf)
        tails = self.q_n * ratio
        ok = np.nonzero(tails <= rel_tol * self.Q)[0]
        k = int(ok[0]) + 1 if ok.size else self.n_terms
        if k >= self.n_terms:
            return self
        return _finalize(self.pair, self.c_n[:k], self.rho_n[:k], self.q_n[:k],
                         self.rho_inf, rel_tol)

    def rows(self):
        """(n, c_n, rho_n, q_n, partial_Q) tuples for tabular export."""
        pq = self.partial_Q()
        for i in range(self.n_terms):
            yield i, float(self.c_n[i]), float(self.rho_n[i]), float(self.q_n[i]), float(pq[i])


def _finalize(pair, c, rho, q, rho_inf, rel_tol) -> ChargeSequence:
    Q = math.fsum(q)
    M = math.fsum(q * c) / pair.radius
    tail = float(q[-1]) * rho_inf / (1.0 - rho_inf)
    return ChargeSequence(pair, c, rho, q, Q, M, len(q), tail, rho_inf, rel_tol)


def build_sequence(pair: InclusionPair, rel_tol: float = 1e-12,
                   max_terms: int = MAX_TERMS) -> ChargeSequence:
    """Iterate ``c_{n+1} = r + eps - r^2 / (r + eps + c_n)`` until the
    geometric tail certificate drops below ``rel_tol * Q``.

    The update is evaluated as ``((r+eps) c_n + eps (2r+eps)) / (r+eps+c_n)``,
    which is algebraically identical and free of cancellation.
    """
    if not (0.0 < rel_tol <= 1e-2):
        raise DomainError(f"rel_tol must lie in (0, 1e-2], got {rel_tol}")
    r, e = pair.radius, pair.epsilon
    c0 = r + e
    c_lim = pair.limit_point
    rho_inf = r / (c0 + c_lim)
    one_minus = (e + c_lim) / (c0 + c_lim)
    ratio = rho_inf / one_minus
    shift = e * (2.0 * r + e)

    cs = [c0]
    rhos = [1.0]
    qs = [1.0]
    running = 1.0
    cn, qn = c0, 1.0
    while True:
        for _ in range(_CHUNK):
            rho = r / (c0 + cn)
            qn *= rho
            cn = (c0 * cn + shift) / (c0 + cn)
            cs.append(cn)
            rhos.append(rho)
            qs.append(qn)
            running += qn
        if qn * ratio < rel_tol * running:
            break
        if len(qs) >= max_terms:
            raise ConvergenceError(
                "image sequence tail not certified within the iteration cap",
                {"n_terms": len(qs), "tail": qn * ratio, "partial_Q": running,
                 "rho_inf": rho_inf, "pair": pair.as_dict()})
    c = np.array(cs)
    q = np.array(qs)
    rho_arr = np.array(rhos)
    # drop the surplus of the last chunk
    tails = q * ratio
    k = int(np.nonzero(tails < rel_tol * np.cumsum(q))[0][0]) + 1
    return _finalize(pair, c[:k], rho_arr[:k], q[:k], rho_inf, rel_tol)


def moment_M(seq: ChargeSequence) -> tuple[float, float]:
    """``M = sum q_n c_n / r`` and a bound on its truncated remainder.

    ``c_n`` decreases, so the remainder is at most ``(c_last / r) * tail(Q)``.
    """
    return seq.M, float(seq.c_n[-1]) / seq.radius * seq.tail_bound


def capacity_Q(seq: ChargeSequence) -> tuple[float, float]:
    """``Q = sum q_n``; the exact value lies in ``[Q, Q + bound]``."""
    return seq.Q, seq.tail_bound


def supercritical_Q_band(r_star: float) -> tuple[float, float]:
    """Bounds ``1 <= Q <= 1 + r_star / 2`` valid for alpha >= 1, eps <= 1."""
    return 1.0, 1.0 + 0.5 * r_star


def log_law_constant(seq: ChargeSequence) -> float:
    """Empirical constant ``Q - |ln sqrt(delta)|`` (alpha < 1 only)."""
    params = scaling_params(seq.pair)
    if params.regime is not Regime.SUBCRITICAL:
        raise DomainError("the logarithmic law applies to alpha < 1 only")
    return seq.Q - abs(0.5 * math.log(params.delta))
