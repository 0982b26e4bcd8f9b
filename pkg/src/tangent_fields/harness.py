"""Run configuration, sweeps, verification suite, BEM cross-checks, reports."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import asymptotics as asy
from .errors import ConfigError, TangentFieldsError
from .geometry import make_pair
from .image_charges import build_sequence, closed_form_pn, scaling_params
from .incident import from_spec, linear_x1, axial
from .layer_potentials import (DensityPair, assemble_operators, jump_residual, make_grids,
                               solve_capacitor, solve_transmission)
from .singular_fields import (boundary_constants, eval_h0, eval_h_omega, flux_integral,
                              normal_derivative, sup_gradient_on_gap)

MIN_QUAD_ORDER = 8

CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "tangent-fields run configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "experiment": {"enum": ["sequence", "field", "verify", "sweep", "bem-check", "estimate"]},
        "geometry": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "r_star": {"type": "number", "exclusiveMinimum": 0},
                "alpha": {"type": "array", "minItems": 1, "items": {"type": "number"}},
                "epsilon": {"type": "array", "minItems": 1,
                            "items": {"type": "number", "exclusiveMinimum": 0}},
            },
        },
        "physics": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "omega": {"type": "array", "minItems": 1,
                          "items": {"type": "number", "minimum": 0}},
                "rho1": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "kappa1": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "incident": {"type": "object", "required": ["kind"]},
        "tolerances": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "seq_rel_tol": {"type": "number", "exclusiveMinimum": 0, "maximum": 1e-2},
                "quad_order": {"type": "integer"},
                "vol_quad_order": {"type": "integer", "minimum": 4},
                "bem_order": {"type": "integer", "minimum": 4},
                "transmission_order": {"type": "integer", "minimum": 4},
                "fit_tol": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "out_dir": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "workers": {"type": "integer", "minimum": 1},
    },
}

DEFAULTS = {
    "experiment": "sweep",
    "geometry": {"r_star": 1.0, "alpha": [0.0], "epsilon": [1e-2, 1e-3, 1e-4, 1e-5]},
    "physics": {"omega": [0.0], "rho1": 0.01, "kappa1": 1.0},
    "incident": {"kind": "x1"},
    "tolerances": {"seq_rel_tol": 1e-12, "quad_order": 64, "vol_quad_order": 16,
                   "bem_order": 20, "transmission_order": 20, "fit_tol": 0.05},
    "out_dir": "runs",
    "seed": 0,
    "workers": 1,
}


def _merge(base: dict, over: dict) -> dict:
    out = json.loads(json.dumps(base))
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "incident":
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration (see :data:`CONFIG_SCHEMA`)."""

    data: dict

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        merged = _merge(DEFAULTS, d)
        try:
            jsonschema.validate(merged, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"invalid config: {exc.message}") from None
        q = merged["tolerances"]["quad_order"]
        if q < MIN_QUAD_ORDER:
            raise ConfigError(f"quad_order must be >= {MIN_QUAD_ORDER}, got {q}")
        return cls(merged)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(d)

    def override(self, **kw) -> "RunConfig":
        """CLI-style overrides; ``None`` values are ignored."""
        d = json.loads(json.dumps(self.data))
        mapping = {"epsilon": ("geometry", "epsilon"), "alpha": ("geometry", "alpha"),
                   "omega": ("physics", "omega")}
        for k, v in kw.items():
            if v is None:
                continue
            if k in mapping:
                a, b = mapping[k]
                d[a][b] = list(v)
            else:
                d[k] = v
        return RunConfig.from_dict(d)

    # convenient accessors
    def __getitem__(self, key):
        return self.data[key]

    @property
    def tol(self) -> dict:
        return self.data["tolerances"]

    def tuples(self) -> list[tuple]:
        g, ph = self.data["geometry"], self.data["physics"]
        return [(g["r_star"], a, e, w) for a in g["alpha"] for e in g["epsilon"]
                for w in ph["omega"]]

    def digest(self) -> str:
        """Hash of everything that affects results (not out_dir or workers)."""
        d = {k: v for k, v in self.data.items() if k not in ("out_dir", "workers")}
        blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    def run_dir(self, label: str) -> Path:
        return Path(self.data["out_dir"]) / f"{label}-{self.digest()[:12]}"


def ensure_writable(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory {path} is not writable: {exc}") from exc
    return path


# ---------------------------------------------------------------------------
# sweeps

RESULT_FIELDS = ["r_star", "alpha", "epsilon", "omega", "radius", "n_terms", "Q", "Q_tail",
                 "M", "M_tail", "sup_grad", "sup_grad_t", "normalized_grad", "static_re",
                 "static_im", "freq_re", "freq_im", "remainder_scale", "quad_change",
                 "predicted_scale", "band", "advisory", "error"]


@dataclass
class ResultRow:
    """Measured quantities for one parameter tuple, with certificates.

    ``wall_time`` is kept in memory only; it never reaches the output files.
    """

    r_star: float
    alpha: float
    epsilon: float
    omega: float
    radius: float = math.nan
    n_terms: int = 0
    Q: float = math.nan
    Q_tail: float = math.nan
    M: float = math.nan
    M_tail: float = math.nan
    sup_grad: float = math.nan
    sup_grad_t: float = math.nan
    normalized_grad: float = math.nan
    static_re: float = math.nan
    static_im: float = math.nan
    freq_re: float = math.nan
    freq_im: float = math.nan
    remainder_scale: float = math.nan
    quad_change: float = math.nan
    predicted_scale: float = math.nan
    band: float = math.nan
    advisory: bool = False
    error: str = ""
    wall_time: float = field(default=0.0, compare=False)

    def as_record(self) -> dict:
        return {k: getattr(self, k) for k in RESULT_FIELDS}


def _compute_row(args) -> ResultRow:
    (r_star, alpha, eps, omega), cfgdata = args
    t0 = time.perf_counter()
    row = ResultRow(r_star, alpha, eps, omega)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            tol = cfgdata["tolerances"]
            pair = make_pair(r_star, alpha, eps)
            seq = build_sequence(pair, tol["seq_rel_tol"])
            row.radius = pair.radius
            row.n_terms, row.Q, row.Q_tail = seq.n_terms, seq.Q, seq.tail_bound
            row.M, row.M_tail = seq.M, float(seq.c_n[-1]) / pair.radius * seq.tail_bound
            loc, g = sup_gradient_on_gap(seq, pair, omega)
            row.sup_grad, row.sup_grad_t = g, float(loc[0])
            row.normalized_grad = g * 2.0 * math.pi * r_star * seq.Q * eps ** (1.0 + alpha)
            u = from_spec(cfgdata["incident"], omega)
            if omega * pair.radius <= asy.QUASI_STATIC_LIMIT:
                dec = asy.lambda_difference(seq, pair, omega, u, tol["vol_quad_order"])
                row.static_re, row.static_im = dec.static_part.real, dec.static_part.imag
                row.freq_re, row.freq_im = dec.freq_part.real, dec.freq_part.imag
                row.remainder_scale, row.quad_change = dec.remainder_scale, dec.quad_change
                row.advisory = dec.advisory
                est = asy.theorem_estimate(pair, seq, omega, u, tol["vol_quad_order"], dec)
                row.predicted_scale, row.band = est.predicted_scale, est.band
            else:
                row.advisory = True
    except (TangentFieldsError, ArithmeticError, ValueError) as exc:
        row.error = f"{type(exc).__name__}: {exc}"
    row.wall_time = time.perf_counter() - t0
    return row


def run_sweep(config: RunConfig, out_dir: Path | None = None) -> list[ResultRow]:
    """One :class:`ResultRow` per (r*, alpha, eps, omega) tuple, in input order.

    Failures are recorded in the row's ``error`` field; they never abort the
    sweep. When ``out_dir`` is given it is checked for writability first.
    """
    if out_dir is not None:
        ensure_writable(Path(out_dir))
    work = [(t, config.data) for t in config.tuples()]
    workers = int(config.data.get("workers", 1))
    if workers <= 1 or len(work) <= 1:
        return [_compute_row(w) for w in work]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_compute_row, work))


# ---------------------------------------------------------------------------
# reports

def rows_to_csv(rows: list[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_FIELDS)
    for r in rows:
        rec = r.as_record()
        w.writerow([repr(float(v)) if isinstance(v, float) else
                    (str(v).lower() if isinstance(v, bool) else v) for v in rec.values()])
    return buf.getvalue()


def read_results_csv(path) -> list[ResultRow]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            kw = {}
            for f in dataclasses.fields(ResultRow):
                if f.name not in rec:
                    continue
                v = rec[f.name]
                if f.name == "n_terms":
                    kw[f.name] = int(v)
                elif f.name == "advisory":
                    kw[f.name] = v == "true"
                elif f.name == "error":
                    kw[f.name] = v
                else:
                    kw[f.name] = float(v)
            rows.append(ResultRow(**kw))
    return rows


def fit_rows(rows: list[ResultRow]) -> dict:
    """Blowup-rate and Q-law fits per alpha (omega = 0 rows only)."""
    out = {}
    for alpha in sorted({r.alpha for r in rows}):
        sel = [r for r in rows if r.alpha == alpha and r.omega == 0.0 and not r.error]
        entry = {"n": len(sel)}
        try:
            fit = asy.fit_power_law([(r.epsilon, r.sup_grad) for r in sel],
                                    asy.FitModel.POWER_OVER_LOG)
            entry.update(grad_slope=fit.slope, grad_intercept=fit.intercept,
                         grad_r2=fit.r_squared, grad_target=-(1.0 + alpha))
        except TangentFieldsError as exc:
            entry["grad_fit_error"] = str(exc)
        if len(sel) >= 2 and alpha < 1.0:
            qf = asy.q_log_slope([r.epsilon for r in sel], [r.Q for r in sel])
            entry.update(q_slope=qf.slope, q_intercept=qf.intercept,
                         q_target=(1.0 - alpha) / 2.0)
        out[repr(float(alpha))] = entry
    return out


def _svg_plots(rows, fits, out: Path) -> list[Path]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "tangent-fields"
    paths = []
    fig, ax = plt.subplots(figsize=(5, 4))
    for key, entry in fits.items():
        alpha = float(key)
        sel = sorted((r for r in rows if r.alpha == alpha and r.omega == 0.0 and not r.error),
                     key=lambda r: r.epsilon)
        if not sel:
            continue
        e = np.array([r.epsilon for r in sel])
        g = np.array([r.sup_grad for r in sel])
        ax.loglog(e, g, "o", label=f"alpha={alpha:g}")
        if "grad_slope" in entry:
            fitted = np.exp(entry["grad_intercept"]) * e ** entry["grad_slope"] / np.abs(np.log(e))
            ax.loglog(e, fitted, "-", label=f"fit slope {entry['grad_slope']:.3f}")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("sup |grad h| on gap")
    ax.legend(fontsize=7)
    p = out / "gradient_vs_eps.svg"
    fig.savefig(p, format="svg", metadata={"Date": None})
    plt.close(fig)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(5, 4))
    for alpha in sorted({r.alpha for r in rows}):
        sel = sorted((r for r in rows if r.alpha == alpha and r.omega == 0.0 and not r.error),
                     key=lambda r: r.epsilon)
        if sel:
            ax.plot([abs(math.log(r.epsilon)) for r in sel], [r.Q for r in sel], "o-",
                    label=f"alpha={alpha:g}")
    ax.set_xlabel("|ln epsilon|")
    ax.set_ylabel("Q")
    ax.legend(fontsize=7)
    p = out / "q_vs_logeps.svg"
    fig.savefig(p, format="svg", metadata={"Date": None})
    plt.close(fig)
    paths.append(p)
    return paths


def emit_report(rows: list[ResultRow], out_dir, config: RunConfig | None = None) -> dict:
    """Write ``results.csv``, ``summary.json`` and two SVG plots."""
    if not rows:
        raise ValueError("no results to report")
    out = ensure_writable(Path(out_dir))
    csv_path = out / "results.csv"
    csv_path.write_text(rows_to_csv(rows))
    fits = fit_rows(rows)
    summary = {"n_rows": len(rows), "n_failed": sum(1 for r in rows if r.error),
               "n_advisory": sum(1 for r in rows if r.advisory), "fits": fits}
    if config is not None:
        summary["config_digest"] = config.digest()
        summary["config"] = config.data
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    svgs = _svg_plots(rows, fits, out)
    return {"csv": csv_path, "summary": out / "summary.json", "plots": svgs}


# ---------------------------------------------------------------------------
# verification suite

@dataclass
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "value": float(self.value),
                "tolerance": float(self.tolerance)}


def _corrupt(seq, factor: float = 1.1):
    """Scale the image charges but keep the stale normalization Q."""
    q = seq.q_n.copy()
    q[1:] *= factor
    return dataclasses.replace(seq, q_n=q)


def verify_suite(config: RunConfig, fault: str | None = None) -> dict:
    """Run the invariant checks at the configured tolerances.

    ``fault="corrupt_q"`` perturbs the image charges to exercise failure
    reporting.
    """
    rng = np.random.default_rng(config["seed"])
    tol = config.tol
    checks: list[Check] = []
    g = config["geometry"]
    for alpha in g["alpha"]:
        for eps in g["epsilon"]:
            tag = f"alpha={alpha:g},eps={eps:g}"
            pair = make_pair(g["r_star"], alpha, eps)
            seq = build_sequence(pair, tol["seq_rel_tol"])
            if fault == "corrupt_q":
                seq = _corrupt(seq)
            params = scaling_params(pair)
            n = np.arange(min(seq.n_terms, 200))
            cf = closed_form_pn(params, n)
            err = float(np.max(np.abs(cf - seq.p_n()[: n.size]) / np.abs(cf)))
            checks.append(Check(f"closed_form[{tag}]", err < 1e-11, err, 1e-11))
            bc = boundary_constants(pair, seq)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                for which, C, sign in ((1, bc.C1, 1.0), (2, bc.C2, -1.0)):
                    grid = make_grids(pair, 24)[which - 1]
                    v = eval_h0(seq, grid.nodes).value.real
                    dev = float(np.std(v) / abs(C))
                    checks.append(Check(f"boundary_constancy_{which}[{tag}]",
                                        dev < 10 * tol["seq_rel_tol"], dev,
                                        10 * tol["seq_rel_tol"]))
                    f = flux_integral(seq, pair, which, tol["quad_order"])
                    checks.append(Check(f"flux_{which}[{tag}]", abs(f - sign) < 1e-6,
                                        abs(f - sign), 1e-6))
            pts = rng.normal(size=(8, 3)) * 3 * (pair.radius + eps)
            pts = pts[np.linalg.norm(pts - pair.center_plus, axis=1) > 1.1 * pair.radius]
            pts = pts[np.linalg.norm(pts - pair.center_minus, axis=1) > 1.1 * pair.radius]
            if len(pts):
                a = eval_h0(seq, pts).value
                b = eval_h_omega(seq, 0.0, pts).value
                c = eval_h0(seq, -pts).value
                checks.append(Check(f"h_omega_at_zero[{tag}]", bool(np.all(a == b)),
                                    float(np.abs(a - b).max()), 0.0))
                odd = float(np.abs(a + c).max() / max(np.abs(a).max(), 1e-300))
                checks.append(Check(f"odd_symmetry[{tag}]", odd < 1e-12, odd, 1e-12))
    # layer-potential calibration on a moderate pair
    pair = make_pair(1.0, 0.0, 0.1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        g1, g2 = make_grids(pair, 16)
        ops = assemble_operators(g1, g2, 0.0)
    n1 = g1.size
    s1 = float(np.abs(ops.S[:n1, :n1].sum(axis=1) + pair.radius).max())
    k1 = float(np.abs(ops.K[:n1, :n1].sum(axis=1) - 0.5).max())
    checks.append(Check("calibration_S", s1 < 1e-10, s1, 1e-10))
    checks.append(Check("calibration_K", k1 < 1e-10, k1, 1e-10))
    W = np.concatenate([g1.weights, g2.weights])
    WS = W[:, None] * ops.S
    sym = float(np.abs(WS - WS.T).max() / np.abs(WS).max())
    checks.append(Check("symmetry_S", sym < 1e-10, sym, 1e-10))
    traces = jump_residual(pair.radius, 24, seed=int(rng.integers(2 ** 31)))
    jump = max(traces.values())
    checks.append(Check("jump_relation", jump < 1e-8, jump, 1e-8))
    verdict = all(c.passed for c in checks)
    return {"passed": verdict, "n_checks": len(checks),
            "n_failed": sum(not c.passed for c in checks),
            "checks": [c.as_dict() for c in checks], "fault": fault}


# ---------------------------------------------------------------------------
# BEM cross-check

def _gap_points(eps: float, n: int = 21) -> np.ndarray:
    return np.linspace(-eps, eps, n + 2)[1:-1]


def decomposition_gradients(pair, seq, cap) -> dict:
    """``max |grad u|`` and ``max |grad b|`` on the gap, ``b = u - a h0``.

    ``h0 = S^0[d_nu h0|_+]``, so ``b`` is represented by the density
    ``phi - a d_nu h0|_+``.
    """
    bc = boundary_constants(pair, seq)
    a = cap.lambda_difference / bc.difference
    g1, g2 = cap.grids
    sig = DensityPair(normal_derivative(seq, g1), normal_derivative(seq, g2))
    phib = DensityPair(cap.density.phi1 - a * sig.phi1, cap.density.phi2 - a * sig.phi2)
    t = _gap_points(pair.epsilon)
    gu = cap.axis_gradient(t)
    gb = cap.axis_gradient(t, density=phib)
    nu = np.sqrt((np.abs(gu) ** 2).sum(axis=1))
    nb = np.sqrt((np.abs(gb) ** 2).sum(axis=1))
    return {"a": complex(a), "max_grad_u": float(nu.max()), "max_grad_b": float(nb.max())}


def lemma_remainder_slope(pair, order: int, omegas=(1e-2, 5e-3, 2.5e-3), kappa1: float = 1.0,
                          check_points=None) -> dict:
    """Richardson check of ``v_w = u + C w + O(w^2)`` with ``rho1 = w``.

    ``d(w) = v_w - u`` at exterior check points; ``R(w) = d(w) - 2 d(w/2)``
    cancels the linear term, and ``log2 |R(w)| / |R(w/2)|`` estimates the
    remainder order. Needs three omegas in halving progression.
    """
    w = sorted(omegas, reverse=True)
    if len(w) != 3 or not all(abs(w[i + 1] * 2 - w[i]) < 1e-12 * w[i] for i in range(2)):
        raise ConfigError("the remainder check needs three frequencies w, w/2, w/4")
    grids = make_grids(pair, order)
    c = pair.c0
    X = np.array(check_points if check_points is not None else
                 [[c + 1.5 * pair.radius, 0, 0], [c, 0, 1.4 * pair.radius],
                  [-c, 0.9 * pair.radius, 0.9 * pair.radius],
                  [0.5 * c, 0.3 * pair.radius, 1.2 * pair.radius]])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cap = solve_capacitor(pair, grids, 0.0, linear_x1())
        uc = cap.evaluate(X)
        d = {}
        for om in w:
            tr = solve_transmission(pair, grids, om, om, kappa1, axial(om))
            d[om] = tr.evaluate(X) - uc
    R1 = d[w[0]] - 2 * d[w[1]]
    R2 = d[w[1]] - 2 * d[w[2]]
    slope = math.log2(np.linalg.norm(R1) / np.linalg.norm(R2))
    linear = [float(np.linalg.norm(d[om]) / om) for om in w]
    return {"slope": slope, "omegas": w, "linear_coefficient_norms": linear,
            "order": order}


def bem_crosscheck(config: RunConfig) -> dict:
    """Series-versus-BEM comparison of the potential difference, gap
    gradients of ``u`` and ``b``, and the low-frequency remainder slope."""
    g = config["geometry"]
    tol = config.tol
    rows = []
    for alpha in g["alpha"]:
        for eps in g["epsilon"]:
            pair = make_pair(g["r_star"], alpha, eps)
            if eps < 0.02 * pair.radius:
                raise ConfigError(f"BEM cross-checks need eps >= 0.02 r (eps={eps}, r={pair.radius})")
    u_inc = from_spec(config["incident"], 0.0)
    for alpha in g["alpha"]:
        for eps in g["epsilon"]:
            pair = make_pair(g["r_star"], alpha, eps)
            seq = build_sequence(pair, tol["seq_rel_tol"])
            series = asy.static_part(seq, u_inc)
            rec = {"alpha": alpha, "epsilon": eps, "series": [series.real, series.imag]}
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    n = tol["bem_order"]
                    coarse = solve_capacitor(pair, make_grids(pair, n), 0.0, u_inc)
                    fine = solve_capacitor(pair, make_grids(pair, 2 * n), 0.0, u_inc)
                lf, lc = fine.lambda_difference, coarse.lambda_difference
                rec.update(bem=[lf.real, lf.imag], bem_coarse=[lc.real, lc.imag],
                           orders=[n, 2 * n], condition=fine.condition,
                           self_convergence=abs(lf - lc) / max(abs(lf), 1e-300),
                           deviation=abs(lf - series) / max(abs(series), 1e-300)
                           if abs(series) > 0 else abs(lf))
                dg = decomposition_gradients(pair, seq, fine)
                rec.update(max_grad_u=dg["max_grad_u"], max_grad_b=dg["max_grad_b"],
                           ratio=dg["max_grad_b"] / dg["max_grad_u"],
                           a=[dg["a"].real, dg["a"].imag])
            except TangentFieldsError as exc:
                rec["error"] = f"{type(exc).__name__}: {exc}"
            rows.append(rec)
    report = {"rows": rows}
    ok = [r for r in rows if "error" not in r]
    ok.sort(key=lambda r: -r["epsilon"])
    if len(ok) >= 2:
        gb = [r["max_grad_b"] for r in ok]
        gu = [r["max_grad_u"] for r in ok]
        report["grad_b_variation"] = (max(gb) - min(gb)) / max(gb)
        report["grad_u_monotone"] = all(gu[i + 1] > gu[i] for i in range(len(gu) - 1))
    omegas = [w for w in config["physics"]["omega"] if w > 0]
    if len(omegas) == 3:
        pair = make_pair(g["r_star"], g["alpha"][0], max(g["epsilon"]))
        try:
            report["remainder"] = lemma_remainder_slope(
                pair, tol["transmission_order"], omegas, config["physics"]["kappa1"])
        except TangentFieldsError as exc:
            report["remainder"] = {"error": f"{type(exc).__name__}: {exc}"}
    return report
