"""Command-line entry points.

Subcommands:
    analyze      run the full pipeline from a JSON config file
    grover       shorthand for the reduced search model
    field        shorthand for an explicit polynomial field
    pspin-sweep  stoquasticity sweep with homotopy verdict

Exit codes: 0 = certified, 2 = partial / non-certifiable, 1 = error.
Tolerance knobs can be overridden through MORSEAQC_* environment
variables (see --help epilog).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .analysis import (AnalysisConfig, ENV_KNOBS, run_analysis, write_sweep_csv)
from .errors import MorseAqcError
from .pspin import b_sweep, homotopy_check

_EPILOG = "environment overrides: " + ", ".join(
    f"MORSEAQC_{name} -> {attr}" for name, (attr, _) in sorted(ENV_KNOBS.items()))


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors, which collides with the
    # "partial result" exit code; remap to 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="morseaqc", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter,
                     epilog=_EPILOG)
    sub = parser.add_subparsers(dest="command", required=True)

    p_an = sub.add_parser("analyze", help="run the pipeline from a JSON config",
                          epilog=_EPILOG)
    p_an.add_argument("--config", required=True, help="path to a JSON config file")
    p_an.add_argument("--out", default=None, help="output directory (overrides config)")

    p_gr = sub.add_parser("grover", help="analyze the reduced search model")
    p_gr.add_argument("--N", type=int, required=True, help="database size (power of two)")
    p_gr.add_argument("--out", default="morseaqc_out")

    p_fd = sub.add_parser("field", help="analyze an explicit polynomial field")
    p_fd.add_argument("--poly", required=True,
                      help='JSON file: {"coeffs": {"i,j": c}, "window": [[s0,s1],[l0,l1]]}')
    p_fd.add_argument("--out", default="morseaqc_out")

    p_ps = sub.add_parser("pspin-sweep", help="stoquasticity sweep of the p-spin sector")
    p_ps.add_argument("--n", type=int, required=True)
    p_ps.add_argument("--p", type=int, required=True)
    p_ps.add_argument("--k", type=int, default=2)
    p_ps.add_argument("--b-grid", default="0:1:41",
                      help="lo:hi:count or comma-separated values (default 0:1:41)")
    p_ps.add_argument("--seed-density", type=int, default=64)
    p_ps.add_argument("--out", default="morseaqc_out")
    return parser


def _parse_b_grid(spec: str) -> np.ndarray:
    if ":" in spec:
        lo, hi, count = spec.split(":")
        return np.linspace(float(lo), float(hi), int(count))
    return np.array([float(x) for x in spec.split(",")])


def _run_pipeline(raw_config: dict, out_dir: str | None) -> int:
    cfg = AnalysisConfig.from_dict(raw_config).apply_env()
    if out_dir is not None:
        cfg.out_dir = out_dir
    report = run_analysis(cfg)
    sys.stdout.write(f"status: {report.status}\n")
    for flag in report.flags:
        sys.stdout.write(f"flag: {flag}\n")
    if cfg.out_dir:
        sys.stdout.write(f"wrote {os.path.join(cfg.out_dir, 'report.json')}\n")
    return 0 if report.status == "certified" else 2


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            with open(args.config) as fh:
                raw = json.load(fh)
            return _run_pipeline(raw, args.out)
        if args.command == "grover":
            return _run_pipeline({"model": {"name": "grover", "N": args.N}}, args.out)
        if args.command == "field":
            with open(args.poly) as fh:
                poly = json.load(fh)
            return _run_pipeline({"model": {"name": "field", **poly}}, args.out)
        if args.command == "pspin-sweep":
            grid = _parse_b_grid(args.b_grid)
            records = b_sweep(args.n, args.p, k=args.k, b_grid=grid,
                              seed_density=args.seed_density)
            verdict = homotopy_check(records)
            os.makedirs(args.out, exist_ok=True)
            write_sweep_csv(os.path.join(args.out, "bsweep.csv"), records)
            sys.stdout.write(f"records: {len(records)} "
                             f"flagged: {sum(r.flagged for r in records)}\n")
            sys.stdout.write(f"homotopy: {'pass' if verdict.passed else 'fail'} "
                             f"chi={verdict.chi}\n")
            for msg in verdict.failures:
                sys.stdout.write(f"failure: {msg}\n")
            sys.stdout.write(f"wrote {os.path.join(args.out, 'bsweep.csv')}\n")
            return 0 if verdict.passed and not any(r.flagged for r in records) else 2
        raise AssertionError(f"unhandled command {args.command}")
    except MorseAqcError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
