"""Command line entry point: ``yflow run | verify | constants``.

Exit status is 0 when every check passes, 1 when a check fails and 2 on a
usage or configuration error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from . import bounds
from .errors import ConfigurationError
from .geometry import Dimension
from .harness import load_config, run_scenario, write_outputs
from .suites import SUITES, run_suite

OUT_ENV = "YFLOW_OUT_DIR"


def _print_report(report, quiet: bool) -> None:
    if not quiet:
        for c in report.checks:
            flag = "PASS" if c.passed else "FAIL"
            print(f"{flag}  {c.id:<45s} violation={c.violation:+.3e}  tol={c.tolerance:.1e}")
        if report.error:
            print(f"ERROR {report.error}")
    print(f"{report.scenario}: {report.status}")


def _cmd_run(args) -> int:
    try:
        config = load_config(args.config)
    except (OSError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    result, report = run_scenario(config)
    for path in write_outputs(config, result, report, args.out):
        if not args.quiet:
            print(f"wrote {path}")
    _print_report(report, args.quiet)
    return 0 if report.status == "pass" else 1


def _cmd_verify(args) -> int:
    report = run_suite(args.suite)
    _print_report(report, args.quiet)
    return 0 if report.status == "pass" else 1


def _cmd_constants(args) -> int:
    try:
        dim = Dimension(args.m)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    m = dim.m
    lam = bounds.lemma3_lambda(1.0 / dim.eta, (m - 1) / math.tanh(1.0))
    print(f"m={m}")
    print(f"eta={dim.eta:.17g}")
    print(f"m(m-1)={m * (m - 1)}")
    print(f"lambda={lam:.17g}")
    print(f"C_m={bounds.lemma5_constant(dim):.17g}")
    print(f"c_m={bounds.default_cutoff_constant(dim):.17g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", help="suppress per-check lines")

    parser = argparse.ArgumentParser(prog="yflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="run a scenario file")
    run.add_argument("--config", required=True, help="scenario JSON file")
    run.add_argument("--out", default=os.environ.get(OUT_ENV, "."),
                     help=f"output directory (default ${OUT_ENV} or .)")
    run.set_defaults(func=_cmd_run)

    verify = sub.add_parser("verify", parents=[common], help="run a built-in suite")
    verify.add_argument("--suite", required=True, choices=[*SUITES, "all"])
    verify.set_defaults(func=_cmd_verify)

    const = sub.add_parser("constants", parents=[common], help="print the constants for m")
    const.add_argument("--m", type=int, required=True)
    const.set_defaults(func=_cmd_constants)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


def cli_main(argv=None) -> int:
    """Run the CLI and return the exit code (argparse usage errors give 2)."""
    try:
        return main(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2


if __name__ == "__main__":
    sys.exit(main())
