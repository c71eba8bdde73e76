"""Command-line interface: ``uavfas run | validate | defaults``.

Exit codes: 0 success, 2 configuration error, 3 every grid point
infeasible, 4 a blocking validation gate failed, 5 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import List, Optional

from . import svgplot
from .config import DEFAULT_CONFIG, RunSpec, apply_sweep, load_config, parse_config, _modes
from .errors import ConfigError, InfeasibleConfigurationError
from .montecarlo import simulate_op
from .rsma import (
    effective_thresholds,
    noma_outage_mc,
    outage_probability,
    outage_probability_asymptotic,
    watts_to_dbm,
)
from .validation import ValidationOptions, literal_audit, run_all

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_GATE, EXIT_IO = 0, 2, 3, 4, 5

CSV_COLUMNS = ["sweep_var", "sweep_value", "user_index", "mode", "op_value", "std_error", "feasible", "seed"]
# resolved parameters echoed after the fixed columns
ECHO_COLUMNS = ["p_b_dbm", "p_a_dbm", "alpha_c", "n_ports", "aperture", "m_user", "threshold_common",
                "threshold_private", "trials", "sampler"]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else ""
    return str(x)


def _point_rows(spec: RunSpec, var: str, value: Optional[float]) -> List[list]:
    sc = spec.scenario if var == "none" else apply_sweep(spec.scenario, var, value, spec.power_shares)
    rows = []
    for k in range(1, sc.n_users + 1):
        u = sc.user(k)
        echo = [watts_to_dbm(sc.p_b), watts_to_dbm(sc.p_a), sc.power.alpha_c, u.fas.n_ports, u.fas.aperture,
                u.fading.m, u.thresholds.common, u.thresholds.private]
        try:
            effective_thresholds(k, sc)
            feasible = True
        except InfeasibleConfigurationError:
            feasible = False
        for mode in spec.modes:
            op = se = None
            trials = sampler = None
            if mode == "noma" and sc.n_users != 2:
                continue
            if mode in ("monte_carlo", "noma"):
                trials, sampler = spec.mc.trials, spec.mc.sampler
            if feasible or mode == "noma":
                if mode == "exact":
                    op = outage_probability(k, sc).value
                elif mode == "asymptotic":
                    op = outage_probability_asymptotic(k, sc).value
                elif mode == "monte_carlo":
                    est = simulate_op(k, sc, spec.mc)
                    op, se = est.value, est.std_error
                else:
                    est = noma_outage_mc(k, sc, factors=spec.noma_factors, mc=spec.mc)
                    op, se = est.value, est.std_error
            seed = spec.mc.seed if mode in ("monte_carlo", "noma") else None
            rows.append([var, value, k, mode, op, se, feasible, seed, *echo, trials, sampler])
    return rows


def run(spec: RunSpec, out=None, jobs: int = 1) -> int:
    out = out or sys.stdout
    if spec.sweep is None:
        points = [("none", None)]
    else:
        points = [(spec.sweep.variable, v) for v in spec.sweep.values]

    def eval_point(p):
        try:
            return _point_rows(spec, *p)
        except Exception as exc:  # attach the grid point
            raise RuntimeError(f"evaluation failed at {p[0]}={p[1]}: {exc}") from exc

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # infeasible points are flagged in the rows
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                chunks = list(pool.map(eval_point, points))
        else:
            chunks = [eval_point(p) for p in points]
    rows = [r for c in chunks for r in c]

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(CSV_COLUMNS + ECHO_COLUMNS)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    text = buf.getvalue()

    try:
        if spec.csv_path:
            with open(spec.csv_path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        if spec.svg_path:
            _write_svg(spec, rows)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    _summary(rows, out)
    if rows and not any(r[6] for r in rows):
        print("error: every grid point is infeasible", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _summary(rows, out):
    print(f"{'sweep':>16} {'value':>10} {'user':>4} {'mode':>12} {'OP':>12} {'se':>10}", file=out)
    for r in rows:
        op = "infeasible" if r[4] is None else f"{r[4]:.4e}"
        se = "" if r[5] is None else f"{r[5]:.2e}"
        val = "" if r[1] is None else f"{r[1]:g}"
        print(f"{r[0]:>16} {val:>10} {r[2]:>4} {r[3]:>12} {op:>12} {se:>10}", file=out)


def _write_svg(spec: RunSpec, rows):
    series = {}
    styles = {}
    for r in rows:
        label = f"user {r[2]} {r[3]}"
        styles[label] = svgplot.DASHES.get(r[3], "")
        series.setdefault(label, []).append((0.0 if r[1] is None else r[1], r[4]))
    xlabel = spec.sweep.variable if spec.sweep else "point"
    with open(spec.svg_path, "w", encoding="utf-8") as fh:
        fh.write(svgplot.line_chart(series, xlabel, styles=styles))


def validate(spec: RunSpec, report_path: Optional[str], out=None, gates=None) -> int:
    out = out or sys.stdout
    opt = ValidationOptions(trials=spec.mc.trials, seed=spec.mc.seed, workers=spec.mc.workers)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        results = run_all(spec.scenario, opt, only=gates, echo=lambda s: print(s, file=out, flush=True))
    notes = sorted({str(w.message) for w in caught if "simulating an infeasible" not in str(w.message)})
    for n in notes:
        print(f"warning: {n}", file=sys.stderr)
    report = {
        "scenario": {"paper_literal_typos": spec.scenario.paper_literal_typos, "n_users": spec.scenario.n_users},
        "options": {"trials": opt.trials, "seed": opt.seed, "workers": opt.workers},
        "gates": [r.to_dict() for r in results],
        "warnings": notes,
        "passed": all(r.passed or not r.blocking for r in results),
    }
    if spec.scenario.paper_literal_typos:
        audit = literal_audit(spec.scenario, opt)
        report["literal_audit"] = audit
        print(f"literal-typo audit at P_a = {audit['power_dbm']} dBm, P_b = {audit['p_b_dbm']} dBm:", file=out)
        for r in audit["rows"]:
            print(f"  user {r['user']}: MC (literal SINRs) {r['mc_literal']:.4e} +- {r['mc_literal_se']:.1e}; "
                  f"closed form literal {r['exact_literal']:.4e}, corrected {r['exact_corrected']:.4e}; "
                  f"MC (corrected SINRs) {r['mc_corrected']:.4e}", file=out)
    text = json.dumps(_finite(report), indent=2, default=_json_default, allow_nan=False)
    try:
        if report_path:
            with open(report_path, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        else:
            print(text, file=out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK if report["passed"] else EXIT_GATE


def _finite(o):
    # JSON has no NaN/inf; report them as null
    if isinstance(o, dict):
        return {k: _finite(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_finite(v) for v in o]
    if isinstance(o, float) and not math.isfinite(o):
        return None
    return o


def _json_default(o):
    if hasattr(o, "item"):
        return o.item()
    if isinstance(o, float) and not math.isfinite(o):
        return None
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uavfas", description="Outage of UAV-relayed RSMA with fluid-antenna users.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="YAML run configuration (defaults to the reference deployment)")
        sp.add_argument("--out", help="CSV output (run) or JSON report (validate)")
        sp.add_argument("--trials", type=int, help="Monte Carlo trials per point")
        sp.add_argument("--seed", type=int, help="Monte Carlo seed (unsigned 64-bit)")
        sp.add_argument("--workers", type=int, help="threads per Monte Carlo estimate")
        sp.add_argument("--paper-literal-typos", action="store_true",
                        help="use the second-hop SINR and threshold exactly as originally printed")

    r = sub.add_parser("run", help="evaluate outage over a sweep and write CSV/SVG")
    common(r)
    r.add_argument("--svg", help="write a log-scale chart here")
    r.add_argument("--modes", help="comma-separated subset of exact,asymptotic,monte_carlo,noma")
    r.add_argument("--jobs", type=int, default=1, help="grid points evaluated concurrently")

    v = sub.add_parser("validate", help="run the acceptance gates and emit a JSON report")
    common(v)
    v.add_argument("--gates", help="comma-separated gate numbers (default: all)")

    sub.add_parser("defaults", help="print the reference configuration")
    return p


def _resolve(args) -> RunSpec:
    spec = load_config(args.config) if args.config else parse_config("")
    mc = spec.mc
    if args.trials is not None:
        mc = replace(mc, trials=args.trials)
    if args.seed is not None:
        mc = replace(mc, seed=args.seed)
    if args.workers is not None:
        mc = replace(mc, workers=args.workers)
    spec = replace(spec, mc=mc)
    if args.paper_literal_typos:
        spec = replace(spec, scenario=replace(spec.scenario, paper_literal_typos=True))
    if getattr(args, "modes", None):
        spec = replace(spec, modes=_modes(args.modes))
    if args.command == "run":
        if args.out:
            spec = replace(spec, csv_path=args.out)
        if args.svg:
            spec = replace(spec, svg_path=args.svg)
    return spec


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "defaults":
        sys.stdout.write(DEFAULT_CONFIG)
        return EXIT_OK
    try:
        spec = _resolve(args)
        gates = None
        if args.command == "validate" and args.gates:
            gates = [int(g) for g in args.gates.split(",")]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "run":
        return run(spec, jobs=args.jobs)
    return validate(spec, args.out, gates=gates)


if __name__ == "__main__":
    sys.exit(main())
