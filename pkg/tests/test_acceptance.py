"""Acceptance criteria, one PASS/FAIL line each.

Run ``pytest tests/test_acceptance.py -s`` (or execute this file) to see the
verdict lines; each criterion is also an ordinary test.
"""

import math
import sys
import time
import warnings

import numpy as np
import pytest

from tangent_fields import (assemble_operators, boundary_constants, build_sequence,
                            closed_form_pn, eval_h0, flux_integral, make_grids, make_pair,
                            plane_wave, scaling_params, sup_gradient_on_gap)
from tangent_fields import asymptotics as asy
from tangent_fields.harness import RunConfig, bem_crosscheck
from tangent_fields.layer_potentials import assemble_series, jump_residual

VERDICTS: dict[int, str] = {}


def report(num: int, ok: bool, detail: str, t0: float) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail} [{time.perf_counter() - t0:.1f}s]"
    VERDICTS[num] = line
    sys.__stdout__.write(line + "\n")
    sys.__stdout__.flush()


@pytest.fixture(scope="module")
def crosscheck():
    cfg = RunConfig.from_dict({"geometry": {"alpha": [0.0], "epsilon": [0.1, 0.05, 0.025]},
                               "physics": {"omega": [1e-2, 5e-3, 2.5e-3], "kappa1": 1.0},
                               "incident": {"kind": "x1"},
                               "tolerances": {"bem_order": 20, "transmission_order": 20}})
    t0 = time.perf_counter()
    rep = bem_crosscheck(cfg)
    rep["elapsed"] = time.perf_counter() - t0
    return rep


def test_criterion_1_sequence_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(200):
        r_star = float(rng.uniform(0.2, 5.0))
        alpha = float(rng.uniform(-1.0, 3.0))
        eps = float(10 ** rng.uniform(-6, -0.5))
        pair = make_pair(r_star, alpha, eps)
        seq = build_sequence(pair, 1e-12)
        n = np.arange(min(seq.n_terms, 201))
        cf = closed_form_pn(scaling_params(pair), n)
        worst = max(worst, float(np.max(np.abs(seq.p_n()[: n.size] - cf) / np.abs(cf))))
    dt = time.perf_counter() - t0
    ok = worst < 1e-11 and dt < 10
    report(1, ok, f"max rel err {worst:.2e} over 200 cases", t0)
    assert ok


def test_criterion_2_q_growth():
    t0 = time.perf_counter()
    eps = [10.0 ** -k for k in range(2, 7)]
    parts, ok = [], True
    for alpha in (-0.5, 0.0, 0.5):
        Q = [build_sequence(make_pair(1.0, alpha, e), 1e-12).Q for e in eps]
        fit = asy.q_log_slope(eps, Q)
        target = (1 - alpha) / 2
        good = abs(fit.slope - target) <= 0.05 * target
        ok &= good
        parts.append(f"a={alpha:g} slope {fit.slope:.4f}/{target:.2f}")
    for alpha in (1.0, 1.5, 2.0):
        Q = [build_sequence(make_pair(1.0, alpha, e), 1e-12).Q for e in eps]
        good = all(1.0 <= q <= 1.5 for q in Q)
        ok &= good
        parts.append(f"a={alpha:g} Q in [{min(Q):.4f},{max(Q):.4f}]")
    ok &= time.perf_counter() - t0 < 60
    report(2, ok, "; ".join(parts), t0)
    assert ok


def test_criterion_3_singular_system():
    t0 = time.perf_counter()
    tol = 1e-12
    const_dev, flux_err, slopes = 0.0, 0.0, []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for eps in (1e-1, 1e-2, 1e-3):
            pair = make_pair(1.0, 0.0, eps)
            seq = build_sequence(pair, tol)
            bc = boundary_constants(pair, seq)
            for which, C, sign in ((1, bc.C1, 1.0), (2, bc.C2, -1.0)):
                grid = make_grids(pair, 24)[which - 1]
                v = eval_h0(seq, grid.nodes).value.real
                const_dev = max(const_dev, float(np.max(np.abs(v - C)) / abs(C)))
                flux_err = max(flux_err, abs(flux_integral(seq, pair, which, 64) - sign))
            R = np.geomspace(10 * pair.c0, 100 * pair.c0, 12)
            d = np.array([1.0, 0.7, 0.4]) / np.linalg.norm([1.0, 0.7, 0.4])
            h = np.abs(eval_h0(seq, R[:, None] * d).value)
            slopes.append(float(np.polyfit(np.log(R), np.log(h), 1)[0]))
    ok = (const_dev < 10 * tol and flux_err < 1e-6
          and all(abs(s + 2) <= 0.1 for s in slopes) and time.perf_counter() - t0 < 60)
    report(3, ok, f"constancy {const_dev:.1e}, flux err {flux_err:.1e}, "
                  f"decay slopes {', '.join(f'{s:.3f}' for s in slopes)}", t0)
    assert ok


def test_criterion_4_blowup_sandwich():
    t0 = time.perf_counter()
    eps = [1e-2, 1e-3, 1e-4, 1e-5]
    parts, ok, samples0 = [], True, None
    for alpha in (0.0, 0.5):
        norm, samples = [], []
        for e in eps:
            pair = make_pair(1.0, alpha, e)
            seq = build_sequence(pair, 1e-12)
            _, g = sup_gradient_on_gap(seq, pair)
            norm.append(g * 2 * math.pi * seq.Q * e ** (1 + alpha))
            samples.append((e, g))
        ratio = max(norm) / min(norm)
        ok &= ratio <= 3
        parts.append(f"a={alpha:g} band ratio {ratio:.3f}")
        if alpha == 0.0:
            samples0 = samples
    fit = asy.fit_power_law(samples0, asy.FitModel.POWER_OVER_LOG)
    ok &= abs(fit.slope + 1) <= 0.05 and time.perf_counter() - t0 < 120
    parts.append(f"PowerOverLog slope {fit.slope:.4f}")
    report(4, ok, "; ".join(parts), t0)
    assert ok


def test_criterion_5_bem_crossvalidation(crosscheck):
    t0 = time.perf_counter() - crosscheck["elapsed"]
    (row,) = [r for r in crosscheck["rows"] if r["epsilon"] == 0.05]
    ok = (row["deviation"] < 0.02 and row["self_convergence"] < 0.005
          and crosscheck["elapsed"] < 300)
    report(5, ok, f"deviation {row['deviation']:.2e}, self-convergence "
                  f"{row['self_convergence']:.2e} at orders {row['orders']}", t0)
    assert ok


def test_criterion_6_decomposition(crosscheck):
    t0 = time.perf_counter() - crosscheck["elapsed"]
    var = crosscheck["grad_b_variation"]
    mono = crosscheck["grad_u_monotone"]
    slope = crosscheck["remainder"]["slope"]
    rows = sorted(crosscheck["rows"], key=lambda r: -r["epsilon"])
    gb = ", ".join(f"{r['max_grad_b']:.2e}" for r in rows)
    gu = ", ".join(f"{r['max_grad_u']:.2f}" for r in rows)
    ok = var < 0.2 and mono and abs(slope - 2) <= 0.3 and crosscheck["elapsed"] < 600
    report(6, ok, f"grad b variation {var:.2f} ({gb}); grad u {gu} monotone={mono}; "
                  f"remainder slope {slope:.3f}", t0)
    assert ok


def test_criterion_7_frequency_effect():
    t0 = time.perf_counter()
    eps = 1e-4
    pair = make_pair(1.0, 0.0, eps)
    seq = build_sequence(pair, 1e-12)
    vals = []
    for c in (0.1, 10.0):
        om = c * math.sqrt(eps)
        vals.append(asy.reconstructed_gap_gradient(seq, pair, om, plane_wave([0, 0, 1], om)))
    ratio = vals[1] / vals[0]
    ok = ratio >= 10 and time.perf_counter() - t0 < 30
    report(7, ok, f"gradient {vals[0]:.3e} -> {vals[1]:.3e}, ratio {ratio:.1f}", t0)
    assert ok


def test_criterion_8_layer_calibration():
    t0 = time.perf_counter()
    pair = make_pair(1.0, 0.0, 0.3)
    g1, g2 = make_grids(pair, 16)
    ops = assemble_operators(g1, g2, 0.0)
    n1 = g1.size
    cal = 0.0
    for blk, r in ((slice(0, n1), pair.radius), (slice(n1, None), pair.radius)):
        cal = max(cal, float(np.abs(ops.S[blk, blk].sum(axis=1) + r).max()),
                  float(np.abs(ops.K[blk, blk].sum(axis=1) - 0.5).max()))
    jump = max(jump_residual(pair.radius, 24).values())
    psi = np.random.default_rng(3).normal(size=g1.size + g2.size)
    S1 = assemble_series("S", 1, g1, g2)
    S2 = assemble_series("S", 2, g1, g2)
    omegas = np.array([1e-2, 5e-3, 2.5e-3])
    res = [np.linalg.norm((assemble_operators(g1, g2, w).S - (ops.S + w * S1 + w * w * S2)) @ psi)
           for w in omegas]
    slope = float(np.polyfit(np.log(omegas), np.log(res), 1)[0])
    ok = cal < 1e-10 and jump < 1e-8 and abs(slope - 3) <= 0.3 and time.perf_counter() - t0 < 60
    report(8, ok, f"calibration {cal:.1e}, jump {jump:.1e}, expansion slope {slope:.3f}", t0)
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
