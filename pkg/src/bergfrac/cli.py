"""Command-line entry point.

Exit codes: 0 all contracts pass, 1 some contract fails, 2 unknown
experiment, 3 configuration or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time

import numpy as np

from . import analysis, experiments, operators, projection
from .experiments import (
    CONTRACTS,
    ConfigError,
    ExperimentConfig,
    ResultRecord,
    UnknownExperimentError,
    emit,
)
from .grid import PolarGrid
from .parsing import ParseError, parse_series_literal, parse_weight_spec
from .series import DiskDomainError, PowerSeries
from .weights import moments_upto

EXIT_OK, EXIT_FAIL, EXIT_UNKNOWN, EXIT_CONFIG = 0, 1, 2, 3


def _write(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def cmd_moments(args) -> int:
    w = parse_weight_spec(args.weight)
    table = moments_upto(w, args.N, method=args.method)
    _write(table.to_csv(), args.out)
    return EXIT_OK


def cmd_classify(args) -> int:
    w = parse_weight_spec(args.weight)
    rep = analysis.classify(w, args.K)
    _write(json.dumps(_jsonable(rep.to_dict()), indent=1, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def cmd_fracd(args) -> int:
    omega = parse_weight_spec(args.source)
    nu = parse_weight_spec(args.target)
    f = parse_series_literal(args.series)
    z = complex(args.at.replace(" ", ""))
    R = operators.build(omega, nu, f.degree)
    direct = complex(R(f)(z))
    integral = operators.apply_integral_form(omega, nu, f, z)
    gap = abs(direct - integral)
    print(f"multiplier  {direct.real:.17g} {direct.imag:+.17g}j")
    print(f"integral    {integral.real:.17g} {integral.imag:+.17g}j")
    print(f"gap         {gap:.17g}")
    return EXIT_OK if gap <= 1e-8 * (1 + abs(direct)) else EXIT_FAIL


def cmd_preimage(args) -> int:
    w = parse_weight_spec(args.weight)
    h = parse_series_literal(args.series)
    N = h.degree
    grid = PolarGrid.for_weight(w, args.J, 2 * N + 2)
    if args.method == "bloch":
        g = projection.preimage_bloch(w, h, args.alpha, grid=grid, force=args.force)
        tol = CONTRACTS["preimage_grid"]
    else:
        g = projection.preimage_regular(w, h, grid=grid, force=args.force)
        tol = CONTRACTS["preimage_regular"]
    rec = projection.project(w, g, N)
    rows = [ResultRecord("preimage", {"k": k}, {"h_k": complex(a), "recovered_k": complex(b),
                                                "abs_err": abs(a - b)}, bool(abs(a - b) <= tol))
            for k, (a, b) in enumerate(zip(h.coeffs, rec.coeffs))]
    _write(experiments.render(rows, "csv"), args.out)
    return EXIT_OK if all(r.passed for r in rows) else EXIT_FAIL


def cmd_verify_lp(args) -> int:
    w = parse_weight_spec(args.weight)
    rng = np.random.default_rng(args.seed)
    rows = []
    for t in range(args.trials):
        f = PowerSeries.random(rng, args.deg)
        g = PowerSeries.random(rng, args.deg)
        classical = analysis.lp_identity_residual(f, g, w) / analysis.lp_identity_scale(f, g, w)
        frac = analysis.frac_lp_residual(f, g, w, w, w, 1, 1)
        shifted = analysis.shifted_lp_residual(f, g, w)
        rows.append(ResultRecord(
            "verify-lp", {"weight": w.label, "seed": args.seed, "trial": t, "deg": args.deg},
            {"lp_residual": classical, "frac_lp_residual": frac, "shifted_residual": shifted},
            bool(max(classical, frac, shifted) <= CONTRACTS["lp_rel"])))
    _write(experiments.render(rows, "csv"), args.out)
    worst = max(max(r.outputs.values()) for r in rows)
    print(f"trials={args.trials} max_residual={worst:.3g}", file=sys.stderr)
    return EXIT_OK if all(r.passed for r in rows) else EXIT_FAIL


def cmd_kernel_norm(args) -> int:
    cfg = ExperimentConfig.from_mapping({
        "experiment": "kernel-norm-8pi", "weights": [args.weight],
        "j_max": str(args.j_max), "J": str(args.J)})
    rows = []
    experiments.run_kernel_norm(cfg, rows)
    cols = ["|z|", "N", "M_angles", "a1_norm", "eight_over_pi_gap", "scaled_norm"]
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(cols)
    for r in rows:
        row = {**r.inputs, **r.outputs}
        wr.writerow([experiments.format_value(row[c]) for c in cols])
    _write(buf.getvalue(), args.out)
    return EXIT_OK if all(r.passed for r in rows) else EXIT_FAIL


def cmd_experiment(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        cfg = ExperimentConfig.from_text(fh.read())
    if args.out:
        cfg = ExperimentConfig.from_mapping({**cfg.raw, "out": args.out,
                                             **({"format": args.format} if args.format else {})})
    start = time.perf_counter()
    records = experiments.run_experiment(cfg)
    total_time = time.perf_counter() - start
    if not cfg.out:
        sys.stdout.write(emit(records, None, cfg.format))
    failed = sum(not r.passed for r in records)
    print(f"{cfg.name}: {len(records) - failed}/{len(records)} rows pass "
          f"({total_time:.2f} s)", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bergfrac",
                                description="Fractional derivatives and Bergman projections "
                                            "for radial weights on the unit disk.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("moments", help="moment table as CSV")
    s.add_argument("--weight", required=True)
    s.add_argument("--N", type=int, default=20)
    s.add_argument("--method", choices=["auto", "closed_form", "quadrature"], default="auto")
    s.add_argument("--out")
    s.set_defaults(func=cmd_moments)

    s = sub.add_parser("classify", help="class report as JSON")
    s.add_argument("--weight", required=True)
    s.add_argument("--K", type=float, default=2.0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("fracd", help="evaluate R^{omega,nu} f(z) two ways")
    s.add_argument("--from", dest="source", required=True)
    s.add_argument("--to", dest="target", required=True)
    s.add_argument("--series", required=True)
    s.add_argument("--at", required=True, help="complex point, e.g. 0.3+0.4j")
    s.set_defaults(func=cmd_fracd)

    s = sub.add_parser("preimage", help="pre-image round trip report")
    s.add_argument("--weight", required=True)
    s.add_argument("--series", required=True)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--method", choices=["bloch", "regular"], default="bloch")
    s.add_argument("--J", type=int, default=200)
    s.add_argument("--force", action="store_true", help="skip the class gate")
    s.add_argument("--out")
    s.set_defaults(func=cmd_preimage)

    s = sub.add_parser("verify-lp", help="Littlewood-Paley residual statistics")
    s.add_argument("--weight", required=True)
    s.add_argument("--deg", type=int, default=50)
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("--seed", type=int, default=20240601)
    s.add_argument("--out")
    s.set_defaults(func=cmd_verify_lp)

    s = sub.add_parser("kernel-norm", help="scaled A^1 norms of the kernel derivative")
    s.add_argument("--weight", default="std:alpha=0")
    s.add_argument("--j-max", type=int, default=10)
    s.add_argument("--J", type=int, default=200)
    s.add_argument("--out")
    s.set_defaults(func=cmd_kernel_norm)

    s = sub.add_parser("experiment", help="run a named experiment from a config file")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.add_argument("--format", choices=["csv", "json"])
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UnknownExperimentError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_UNKNOWN
    except (ConfigError, ParseError, projection.PreimageGateError, DiskDomainError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
