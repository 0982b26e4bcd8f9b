import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tangent_fields import (ConvergenceError, DomainError, Regime, build_sequence,
                            capacity_Q, closed_form_pn, make_pair, moment_M, scaling_params,
                            supercritical_Q_band)
from tangent_fields.image_charges import log_law_constant

from conftest import cached_sequence


def test_first_terms_hand_values(seq01):
    assert seq01.c_n[0] == 1.1
    assert seq01.c_n[1] == pytest.approx(1.1 - 1 / 2.2, rel=1e-15)
    assert seq01.rho_n[1] == pytest.approx(1 / 2.2, rel=1e-15)
    assert seq01.q_n[0] == 1.0 and seq01.rho_n[0] == 1.0
    assert seq01.c_n[-1] == pytest.approx(math.sqrt(0.01 + 0.2), rel=1e-11)
    assert math.sqrt(0.21) == pytest.approx(0.4582575695, rel=1e-9)


def test_scaling_params_examples():
    p = scaling_params(make_pair(1, 0, 1e-4))
    assert p.delta == pytest.approx(1e-4, rel=1e-14) and p.N == 100
    assert p.p_limit == pytest.approx(math.sqrt(1e-8 + 2e-4), rel=1e-14)
    assert p.p_limit == pytest.approx(0.0141425, rel=1e-6)
    p = scaling_params(make_pair(1, 1, 0.3))
    assert p.delta == pytest.approx(1.0, rel=1e-14) and p.p_limit == pytest.approx(math.sqrt(3))
    assert p.regime is Regime.SUPERCRITICAL
    p = scaling_params(make_pair(1, 0.5, 1e-4))
    assert p.delta == pytest.approx(0.01, rel=1e-12) and p.N == 10
    assert p.regime is Regime.SUBCRITICAL


@given(st.floats(0.1, 10), st.floats(-1, 3), st.floats(1e-8, 1))
def test_scaling_params_invariants(r_star, alpha, eps):
    p = scaling_params(make_pair(r_star, alpha, eps))
    assert p.p_limit > 0 and p.growth_A > 1 and p.one_plus_delta_minus_p > 0
    assert (p.regime is Regime.SUBCRITICAL) == (alpha < 1)
    assert p.growth_A == pytest.approx(
        (1 + p.delta + p.p_limit) / p.one_plus_delta_minus_p, rel=1e-12)


def test_closed_form_reproduces_start_and_limit(seq01):
    params = scaling_params(seq01.pair)
    assert closed_form_pn(params, 0) == pytest.approx(1.1, rel=1e-14)
    assert closed_form_pn(params, 10 ** 6) == params.p_limit
    assert closed_form_pn(params, 10 ** 9) == params.p_limit
    with pytest.raises(DomainError):
        closed_form_pn(params, -1)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 5), st.floats(-1, 3), st.floats(1e-3, 1))
def test_closed_form_matches_recursion(r_star, alpha, eps):
    _, seq = cached_sequence(r_star, alpha, eps)
    n = np.arange(min(201, seq.n_terms))
    exact = closed_form_pn(scaling_params(seq.pair), n)
    rec = seq.p_n()[: n.size]
    assert np.max(np.abs(rec - exact) / exact) < 1e-11


@pytest.mark.parametrize("args", [(1, 0, 1e-3), (1, 0.5, 1e-4), (2, -0.5, 1e-3), (1, 2, 0.01)])
def test_sequence_invariants(args):
    pair, seq = cached_sequence(*args)
    c = seq.c_n
    # strict decrease holds until c_n reaches the limit to working precision
    resolved = c[:-1] - pair.limit_point > 1e-14 * pair.c0
    assert np.all(np.diff(c)[resolved] < 0)
    assert np.all(np.diff(c) <= 0)
    assert np.all(c - pair.limit_point > -1e-14 * pair.c0)
    assert np.all(seq.q_n > 0)
    params = scaling_params(pair)
    bound = params.one_plus_delta_minus_p if params.regime is Regime.SUBCRITICAL else 1.0
    assert np.all(seq.q_n[2:] <= bound * seq.q_n[1:-1] * (1 + 1e-14))
    assert seq.Q == pytest.approx(math.fsum(seq.q_n), rel=1e-15)
    assert seq.tail_bound <= seq.rel_tol * seq.Q


def test_tail_certificate_brackets_longer_sum():
    pair, loose = cached_sequence(1, 0, 1e-3, 1e-6)
    _, tight = cached_sequence(1, 0, 1e-3, 1e-14)
    assert loose.Q <= tight.Q <= loose.Q + loose.tail_bound
    q, bound = capacity_Q(loose)
    assert (q, bound) == (loose.Q, loose.tail_bound)


def test_truncated_view():
    _, seq = cached_sequence(1, 0, 1e-3)
    short = seq.truncated(1e-6)
    assert short.n_terms < seq.n_terms
    assert short.Q <= seq.Q <= short.Q + short.tail_bound * (1 + 1e-12)


def test_rel_tol_precondition(pair01):
    with pytest.raises(DomainError):
        build_sequence(pair01, 0.0)
    with pytest.raises(DomainError):
        build_sequence(pair01, 0.1)


def test_iteration_cap_raises():
    with pytest.raises(ConvergenceError) as info:
        build_sequence(make_pair(1, 0, 1e-8), 1e-12, max_terms=5000)
    assert info.value.diagnostics["n_terms"] >= 5000


def test_pn_near_harmonic_for_small_delta():
    pair, seq = cached_sequence(1, 0, 1e-6)
    params = scaling_params(pair)
    n = np.arange(params.N + 1)
    dev = np.max(np.abs(seq.p_n()[n] - 1.0 / (n + 1)))
    assert dev < 5 * math.sqrt(params.delta)


def test_moment_positive_and_tends_to_zeta2():
    values = []
    for eps in [1e-2, 1e-4, 1e-6, 1e-8]:
        _, seq = cached_sequence(1, 0, eps)
        M, tail = moment_M(seq)
        assert M > 0 and tail >= 0
        values.append(M)
    err = [abs(m - math.pi ** 2 / 6) for m in values]
    assert all(b < a for a, b in zip(err, err[1:]))
    assert err[-1] < 5e-3


def test_moment_fixture(seq01):
    assert seq01.M == pytest.approx(math.fsum(seq01.q_n * seq01.c_n), rel=1e-14)
    assert seq01.M == pytest.approx(1.7381861225713464, rel=1e-12)


def test_log_law_difference():
    _, a = cached_sequence(1, 0, 1e-3)
    _, b = cached_sequence(1, 0, 1e-5)
    expected = 0.5 * (math.log(1e-3) - math.log(1e-5))
    assert b.Q - a.Q == pytest.approx(expected, rel=0.05)
    c_a, c_b = log_law_constant(a), log_law_constant(b)
    assert abs(c_a - c_b) < 0.05
    with pytest.raises(DomainError):
        log_law_constant(cached_sequence(1, 2, 0.1)[1])


@pytest.mark.parametrize("eps", [1.0, 0.1, 1e-3, 1e-6])
@pytest.mark.parametrize("r_star", [0.5, 1.0, 3.0])
def test_supercritical_band(eps, r_star):
    lo, hi = supercritical_Q_band(r_star)
    for alpha in (1.0, 2.0):
        _, seq = cached_sequence(r_star, alpha, eps)
        assert lo <= seq.Q <= hi


def test_scale_free_point_fixture():
    qs = [cached_sequence(1, a, 1.0)[1].Q for a in (-0.5, 0.0, 1.0, 2.0)]
    assert max(qs) - min(qs) < 1e-14
    assert qs[0] == pytest.approx(1.3410598130771938, rel=1e-12)


def test_rows_export(seq01):
    rows = list(seq01.rows())
    assert len(rows) == seq01.n_terms
    assert rows[0] == (0, 1.1, 1.0, 1.0, 1.0)
    assert rows[-1][4] == pytest.approx(seq01.Q, rel=1e-14)
