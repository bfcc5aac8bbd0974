"""Command-line interface.

Usage::

    l1helmholtz solve    --beta 1 [--n 4096] [--out DIR]
    l1helmholtz minimize --beta 1 [--n 2048] [--r-max X] [--seed S] [--out DIR]
    l1helmholtz verify   --beta 1 [--profile profile.csv] [--out verify.json]
    l1helmholtz scan     --beta-min 0.1 --beta-max 10 --num 15 [--source direct]

Any option may also come from ``--config file.json`` (keys are the long
option names with dashes replaced by underscores); flags on the command line
win.  Exit status: 0 success, 1 computational failure or failed checks,
2 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import closed_form as cf
from .analysis import scaling_scan
from .direct import SolverOptions, minimize
from .exceptions import BracketError, DegenerateProfileError, EvaluationError, StepSizeError
from .grid import RadialGrid
from .io import dumps, read_profile_csv, write_json, write_profile_csv
from .verify import Tolerances, verify

log = logging.getLogger("l1helmholtz")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
COMPUTE_ERRORS = (BracketError, DegenerateProfileError, EvaluationError, StepSizeError, FloatingPointError)


class UsageError(Exception):
    pass


def _positive(name, value):
    if value is None or not (value > 0 and math.isfinite(value)):
        raise UsageError(f"--{name.replace('_', '-')} must be positive, got {value!r}")


def _outdir(path) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def run_solve(args) -> int:
    _positive("beta", args.beta)
    if args.n < 3:
        raise UsageError("--n must be at least 3")
    params, prof, report = cf.solve_report(args.beta, args.n, args.box_factor)
    out = _outdir(args.out)
    if out:
        write_json(out / "report.json", report)
        write_profile_csv(out / "profile.csv", prof)
    print(dumps(report))
    return EXIT_OK


def run_minimize(args) -> int:
    _positive("beta", args.beta)
    if args.max_iters is None or args.max_iters < 1:
        raise UsageError("--max-iters must be a positive integer")
    if args.n < 3:
        raise UsageError("--n must be at least 3")
    params = cf.solve_parameters(args.beta)
    r_max = args.r_max if args.r_max is not None else args.box_factor * params.R
    _positive("r_max", r_max)
    try:
        opts = SolverOptions(step=args.step, max_iters=args.max_iters, energy_tol=args.energy_tol,
                             rearrange_every=args.rearrange_every, seed=args.seed,
                             warm_start=not args.no_warm_start)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    prof, energy, trace = minimize(args.beta, RadialGrid(args.n, r_max), opts)
    F_cf = cf.solve_report(args.beta)[2]["F_total"]
    report = {
        "beta": args.beta,
        "n": args.n,
        "r_max": r_max,
        "seed": args.seed,
        "energy": energy.as_dict(),
        "F_closed_form": F_cf,
        "relerr_vs_closed_form": abs(energy.total - F_cf) / F_cf,
        "iterations": trace.records[-1].iter if trace.records else 0,
        "levels": trace.levels,
        "converged": trace.converged,
        "ascents": trace.ascents,
    }
    out = _outdir(args.out)
    if out:
        write_profile_csv(out / "profile.csv", prof)
        write_json(out / "energy.json", report)
        trace.write_csv(out / "trace.csv")
    print(dumps(report))
    return EXIT_OK


def run_verify(args) -> int:
    _positive("beta", args.beta)
    tol = Tolerances(norm=args.norm_tol, virial=args.virial_tol, helmholtz=args.helmholtz_tol)
    profile = read_profile_csv(args.profile) if args.profile else None
    report = verify(args.beta, profile, n=args.n, tol=tol)
    if args.out:
        write_json(args.out, report)
    print(dumps(report))
    for name, c in report["checks"].items():
        log.info("%-28s %s  value=%.3e tol=%.1e", name, "PASS" if c["passed"] else "FAIL", c["value"], c["tol"])
    return EXIT_OK if report["all_passed"] else EXIT_FAIL


def run_scan(args) -> int:
    _positive("beta_min", args.beta_min)
    _positive("beta_max", args.beta_max)
    if args.beta_min >= args.beta_max:
        raise UsageError("--beta-min must be below --beta-max")
    if args.num is None or args.num < 3:
        raise UsageError("--num must be at least 3")
    betas = np.logspace(math.log10(args.beta_min), math.log10(args.beta_max), args.num)
    try:
        report = scaling_scan(betas, source=args.source, n=args.n, max_workers=args.workers,
                              with_nash=not args.no_nash)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.out:
        write_json(args.out, report.as_dict())
    print(dumps(report.as_dict()))
    return EXIT_FAIL if report.failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="l1helmholtz", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--config", help="JSON file of option defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="closed-form minimiser: parameters, energies, profile")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--box-factor", type=float, default=cf.DEFAULT_BOX_FACTOR)
    p.add_argument("--out", help="output directory (report.json, profile.csv)")
    p.set_defaults(func=run_solve)

    p = sub.add_parser("minimize", help="iterative direct-method minimiser")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n", type=int, default=2048)
    p.add_argument("--r-max", type=float, default=None)
    p.add_argument("--box-factor", type=float, default=2.0, help="r_max in units of R_beta if --r-max is unset")
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--max-iters", type=int, default=SolverOptions.max_iters)
    p.add_argument("--energy-tol", type=float, default=SolverOptions.energy_tol)
    p.add_argument("--rearrange-every", type=int, default=0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--no-warm-start", action="store_true")
    p.add_argument("--out", help="output directory (profile.csv, energy.json, trace.csv)")
    p.set_defaults(func=run_minimize)

    p = sub.add_parser("verify", help="pass/fail checks on the minimiser or a given profile")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--profile", help="profile CSV to check instead of the sampled closed form")
    p.add_argument("--norm-tol", type=float, default=Tolerances.norm)
    p.add_argument("--virial-tol", type=float, default=Tolerances.virial)
    p.add_argument("--helmholtz-tol", type=float, default=Tolerances.helmholtz)
    p.add_argument("--out", help="verification JSON path")
    p.set_defaults(func=run_verify)

    p = sub.add_parser("scan", help="beta scan with log-log exponent fits")
    p.add_argument("--beta-min", type=float, default=0.1)
    p.add_argument("--beta-max", type=float, default=10.0)
    p.add_argument("--num", type=int, default=15)
    p.add_argument("--source", choices=["closed_form", "direct"], default="closed_form")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--no-nash", action="store_true")
    p.add_argument("--out", help="scan report JSON path")
    p.set_defaults(func=run_scan)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return parser.parse_args(argv)
    try:
        config = json.loads(Path(known.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config {known.config}: {exc}")
    if not isinstance(config, dict):
        parser.error("config must be a JSON object")
    choices = parser._subparsers._group_actions[0].choices
    command = next((tok for tok in rest if tok in choices), None)
    if command is None:
        return parser.parse_args(argv)
    sub = choices[command]
    known_dests = {a.dest for a in sub._actions}
    unknown = set(config) - known_dests
    if unknown:
        parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
    sub.set_defaults(**config)
    # required flags satisfied by the config must not be demanded again
    for a in sub._actions:
        if a.dest in config:
            a.required = False
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    args = _apply_config(parser, argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"l1helmholtz {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except COMPUTE_ERRORS as exc:
        print(f"l1helmholtz {args.command}: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (OSError, ValueError) as exc:
        print(f"l1helmholtz {args.command}: failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
