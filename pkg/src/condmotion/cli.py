"""Command-line entry point: ``condmotion {synth,analyze,curves,validate}``.

Exit codes: 0 success, 1 usage or input error, 2 validation failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from .activity import ConfigurationError
from .coder import bound_violations
from .estimator import ConditionalMotionRD
from .frames import MalformedInputError, SyntheticSpec, read_raw_yuv420, synthesize, write_raw_yuv420
from .rdmodel import CURVE_COLUMNS, DomainError, rate_combined, region, write_curves_csv
from .stats import InsufficientDataError, ModelParams

DEFAULT_STEPS = (0.5, 1, 2, 3, 4, 6, 8, 12)
VALIDATE_COLUMNS = CURVE_COLUMNS + ["step", "rate_mv", "rate_residual", "theory_rate", "ok"]
LUMA_NOTE = (
    "rates are bits per luminance pixel; divide by 1.5 to compare with "
    "encoded/original*8 on 4:2:0 files"
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_input(p):
    p.add_argument("input", help="raw 8-bit YUV 4:2:0 file, or a JSON synthetic spec")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--frames", type=int, default=2, help="frame count for synthetic input (default: 2)")
    p.add_argument("--seed", type=int, default=None, help="overrides the synthetic spec's seed")


def _add_analysis(p):
    p.add_argument("--block", type=int, default=16, help="block size in pixels (default: 16)")
    p.add_argument("--t-g", type=float, default=15.0, help="pixel difference threshold (default: 15)")
    p.add_argument("--t-p", type=int, default=None, help="active-pixel count threshold (default: block area / 8)")
    p.add_argument("--range", type=int, default=15, dest="search_range", help="search range in pixels (default: 15)")
    p.add_argument("--b-m", type=float, default=None, help="bits per motion vector (default: fixed-length code)")


def _add_grid(p):
    p.add_argument("--d-min", type=float, default=0.1, help="smallest distortion (default: 0.1)")
    p.add_argument("--d-max", type=float, default=100.0, help="largest distortion (default: 100)")
    p.add_argument("--n", type=int, default=50, help="grid points (default: 50)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="condmotion", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic sequence as raw YUV 4:2:0")
    p.add_argument("spec", help="JSON synthetic spec (kind, rho, sigma2, mean, motion, seed)")
    p.add_argument("output")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--frames", type=int, default=2)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("analyze", help="estimate model parameters; writes params.json and fit.csv")
    _add_input(p)
    _add_analysis(p)
    p.add_argument("--bins", type=int, default=64, help="histogram bins for the Gaussian fit (default: 64)")
    p.add_argument("--output-dir", default=".")

    p = sub.add_parser("curves", help="theoretical combined, all-active and all-inactive curves as CSV")
    p.add_argument("params", help="params.json written by analyze")
    _add_grid(p)
    p.add_argument("--include-mv", action="store_true", help="add the motion-vector rate")
    p.add_argument("--output-dir", default=".")

    p = sub.add_parser("validate", help="empirical sweep against the theoretical bound")
    _add_input(p)
    _add_analysis(p)
    _add_grid(p)
    p.add_argument(
        "--steps", type=float, nargs="+", default=list(DEFAULT_STEPS),
        help=f"quantizer steps (default: {' '.join(map(str, DEFAULT_STEPS))})",
    )
    p.add_argument("--slack", type=float, default=0.05, help="allowed shortfall in bits/pixel (default: 0.05)")
    p.add_argument("--output-dir", default=".")
    return parser


def load_input(args):
    if args.input.lower().endswith(".json"):
        spec = SyntheticSpec.from_json(args.input)
        if args.seed is not None:
            spec = replace(spec, seed=args.seed)
        return synthesize(spec, args.width, args.height, args.frames)
    return read_raw_yuv420(args.input, args.width, args.height)


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _fit(args, seq):
    if len(seq) < 2:
        raise UsageError(f"need at least 2 frames, got {len(seq)}")
    return ConditionalMotionRD(args.block, args.t_g, args.t_p, args.search_range, args.b_m).fit(seq)


def cmd_synth(args):
    spec = SyntheticSpec.from_json(args.spec)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    seq = synthesize(spec, args.width, args.height, args.frames)
    write_raw_yuv420(args.output, seq)
    print(f"wrote {len(seq)} frames of {args.width}x{args.height} to {args.output}")
    return 0


def cmd_analyze(args):
    seq = load_input(args)
    est = _fit(args, seq)
    os.makedirs(args.output_dir, exist_ok=True)
    est.params_.to_json(os.path.join(args.output_dir, "params.json"))
    try:
        report = est.fit_report(args.bins)
    except InsufficientDataError:
        # every block active: no frame differences to fit
        report = None
    fit_path = os.path.join(args.output_dir, "fit.csv")
    if report is None:
        with open(fit_path, "w") as fh:
            fh.write("bin_center,empirical_density,gaussian_density\n")
    else:
        report.to_csv(fit_path)
    pairs = est.analysis_.pairs
    _write_json(
        os.path.join(args.output_dir, "diagnostics.json"),
        {
            "rho_temporal": est.rho_temporal_,
            "kl_divergence": None if report is None else report.kl_divergence,
            "fit_degenerate": report is None or report.degenerate,
            "pairs": [p.params.to_dict() for p in pairs],
            "activity": [p.amap.to_dict() for p in pairs],
            "motion": [p.field.to_dict() for p in pairs],
        },
    )
    p = est.params_
    print(
        f"lambda_m={p.lambda_m:.4f} sigma2_a={p.sigma2_a:.4f} sigma2_i={p.sigma2_i:.4f} "
        f"rho_i={p.rho_i:.4f} b_m={p.b_m:g} over {len(pairs)} frame pair(s)"
    )
    return 0


def cmd_curves(args):
    params = ModelParams.from_json(args.params)
    curves = region(params, args.d_min, args.d_max, args.n, args.include_mv)
    os.makedirs(args.output_dir, exist_ok=True)
    path = os.path.join(args.output_dir, "curves.csv")
    write_curves_csv(path, curves)
    print(f"wrote {sum(len(c.points) for c in curves)} points to {path}; {LUMA_NOTE}")
    return 0


def cmd_validate(args):
    seq = load_input(args)
    est = _fit(args, seq)
    params = est.params_
    points = est.measure(args.steps)
    bad = bound_violations(points, params, args.slack)
    bad_ids = {id(p) for p, _ in bad}

    curves = region(params, args.d_min, args.d_max, args.n, include_mv=True)
    rows = [row for c in curves for row in c.rows()]
    for pt in points:
        theory = rate_combined(params, pt.distortion, pt.distortion, include_mv=True) if pt.distortion > 0 else 0.0
        rows.append(
            {
                "distortion": pt.distortion, "rate": pt.rate_total, "source": "empirical",
                "lambda_m": pt.lambda_m, "rho_i": params.rho_i, "sigma2_a": params.sigma2_a,
                "sigma2_i": params.sigma2_i, "step": pt.step, "rate_mv": pt.rate_mv,
                "rate_residual": pt.rate_residual, "theory_rate": theory, "ok": int(id(pt) not in bad_ids),
            }
        )
    os.makedirs(args.output_dir, exist_ok=True)
    write_curves_csv(os.path.join(args.output_dir, "validate.csv"), [rows], VALIDATE_COLUMNS)
    params.to_json(os.path.join(args.output_dir, "params.json"))
    passed = not bad
    _write_json(
        os.path.join(args.output_dir, "validate.json"),
        {
            "passed": passed,
            "slack": args.slack,
            "note": LUMA_NOTE,
            "violations": [
                {"step": p.step, "distortion": p.distortion, "rate_total": p.rate_total, "theory_rate": t}
                for p, t in bad
            ],
        },
    )
    if passed:
        print(f"PASS: {len(points)} empirical point(s) respect the bound within {args.slack} bits/pixel; {LUMA_NOTE}")
        return 0
    print(f"FAIL: {len(bad)} of {len(points)} empirical point(s) fall below the bound:", file=sys.stderr)
    for p, t in bad:
        print(f"  step={p.step} D={p.distortion:.6g} R={p.rate_total:.6g} < {t:.6g} - {args.slack}", file=sys.stderr)
    return 2


COMMANDS = {"synth": cmd_synth, "analyze": cmd_analyze, "curves": cmd_curves, "validate": cmd_validate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (
        UsageError, MalformedInputError, ConfigurationError, DomainError,
        InsufficientDataError, OSError, ValueError, KeyError, TypeError, json.JSONDecodeError,
    ) as exc:
        print(f"condmotion {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
