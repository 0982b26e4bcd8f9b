"""Command-line entry point ``tangent-fields``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from .errors import ConfigError, TangentFieldsError
from .geometry import make_pair
from .harness import (RunConfig, bem_crosscheck, emit_report, ensure_writable, run_sweep,
                      verify_suite)
from .image_charges import build_sequence
from .incident import from_spec
from .layer_potentials import assemble_operators, dump_matrix, make_grids
from .singular_fields import eval_h_omega, write_field_csv

SUBCOMMANDS = ("sequence", "field", "verify", "sweep", "bem-check", "estimate")


def _floats(s: str) -> list[float]:
    return [float(v) for v in s.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tangent-fields",
                                description="Gradient blowup between nearly touching inclusions.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, help="JSON run configuration")
        s.add_argument("--epsilon", type=_floats, help="comma-separated gap half-widths")
        s.add_argument("--alpha", type=_floats, help="comma-separated curvature exponents")
        s.add_argument("--omega", type=_floats, help="comma-separated frequencies")
        s.add_argument("--out", type=str, help="output root directory")
        s.add_argument("--workers", type=int, help="parallel workers for sweeps")
        s.add_argument("--seed", type=int, help="random seed")
        if name == "verify":
            s.add_argument("--fault", choices=["corrupt_q"], help=argparse.SUPPRESS)
        if name == "bem-check":
            s.add_argument("--dump-matrices", action="store_true",
                           help="write the assembled S and K* in the binary container")
    return p


def load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig.from_dict({})
    return cfg.override(epsilon=args.epsilon, alpha=args.alpha, omega=args.omega,
                        out_dir=args.out, workers=args.workers, seed=args.seed,
                        experiment=args.command)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(type(o).__name__)


def cmd_sequence(cfg: RunConfig, out: Path) -> int:
    summary = []
    for r_star, alpha, eps, _ in dict.fromkeys((t[0], t[1], t[2], 0) for t in cfg.tuples()):
        pair = make_pair(r_star, alpha, eps)
        seq = build_sequence(pair, cfg.tol["seq_rel_tol"])
        name = f"sequence_alpha{alpha:g}_eps{eps:g}.csv"
        with open(out / name, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "c_n", "rho_n", "q_n", "partial_Q"])
            for n, c, rho, q, pq in seq.rows():
                w.writerow([n, repr(c), repr(rho), repr(q), repr(pq)])
        summary.append({"alpha": alpha, "epsilon": eps, "radius": pair.radius, "Q": seq.Q,
                        "Q_tail": seq.tail_bound, "M": seq.M, "n_terms": seq.n_terms,
                        "file": name})
    _write_json(out / "sequence.json", summary)
    return 0


def cmd_field(cfg: RunConfig, out: Path) -> int:
    for r_star, alpha, eps, omega in cfg.tuples():
        pair = make_pair(r_star, alpha, eps)
        seq = build_sequence(pair, cfg.tol["seq_rel_tol"])
        t = np.linspace(-eps, eps, 101)
        pts = np.column_stack([t, np.zeros_like(t), np.zeros_like(t)])
        write_field_csv(out / f"gap_alpha{alpha:g}_eps{eps:g}_omega{omega:g}.csv", pts,
                        eval_h_omega(seq, omega, pts))
        s = np.geomspace(pair.c0 + pair.radius * 1.01, 100 * pair.c0, 60)
        pts = np.column_stack([np.zeros_like(s), np.zeros_like(s), s])
        write_field_csv(out / f"ray_alpha{alpha:g}_eps{eps:g}_omega{omega:g}.csv", pts,
                        eval_h_omega(seq, omega, pts))
    return 0


def cmd_verify(cfg: RunConfig, out: Path, fault=None) -> int:
    rep = verify_suite(cfg, fault=fault)
    _write_json(out / "verdict.json", rep)
    for c in rep["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']} value={c['value']:.3e}")
    return 0 if rep["passed"] else 1


def cmd_sweep(cfg: RunConfig, out: Path) -> int:
    rows = run_sweep(cfg, out)
    emit_report(rows, out, cfg)
    failed = [r for r in rows if r.error]
    for r in failed:
        print(f"row alpha={r.alpha} eps={r.epsilon} omega={r.omega} failed: {r.error}",
              file=sys.stderr)
    return 0


def cmd_bem(cfg: RunConfig, out: Path, dump: bool = False) -> int:
    rep = bem_crosscheck(cfg)
    _write_json(out / "bem.json", rep)
    if dump:
        g = cfg["geometry"]
        pair = make_pair(g["r_star"], g["alpha"][0], g["epsilon"][0])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ops = assemble_operators(*make_grids(pair, cfg.tol["bem_order"]), 0.0)
        dump_matrix(out / "S0.tfmat", ops.S)
        dump_matrix(out / "K0.tfmat", ops.K)
    return 0


def cmd_estimate(cfg: RunConfig, out: Path) -> int:
    reports = []
    for r_star, alpha, eps, omega in cfg.tuples():
        pair = make_pair(r_star, alpha, eps)
        seq = build_sequence(pair, cfg.tol["seq_rel_tol"])
        u = from_spec(cfg["incident"], omega)
        try:
            rep = asy.classify_blowup(pair, seq, omega, u,
                                      vol_quad_order=cfg.tol["vol_quad_order"])
            reports.append({"alpha": alpha, "epsilon": eps, "omega": omega,
                            "regime": rep.regime.value, "predicted_scale": rep.predicted_scale,
                            "measured_scale": rep.measured_scale,
                            "thresholds": list(rep.thresholds), "decision": rep.decision})
        except TangentFieldsError as exc:
            reports.append({"alpha": alpha, "epsilon": eps, "omega": omega,
                            "error": f"{type(exc).__name__}: {exc}"})
    _write_json(out / "estimate.json", reports)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        out = ensure_writable(cfg.run_dir(args.command))
        _write_json(out / "config.json", cfg.data)
        if args.command == "sequence":
            code = cmd_sequence(cfg, out)
        elif args.command == "field":
            code = cmd_field(cfg, out)
        elif args.command == "verify":
            code = cmd_verify(cfg, out, getattr(args, "fault", None))
        elif args.command == "sweep":
            code = cmd_sweep(cfg, out)
        elif args.command == "bem-check":
            code = cmd_bem(cfg, out, args.dump_matrices)
        else:
            code = cmd_estimate(cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    print(str(out))
    return code


if __name__ == "__main__":
    sys.exit(main())
