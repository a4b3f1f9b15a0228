"""Command-line front end.

    pathquant run --scenario <file> [--out <file>] [--csv <file>]
    pathquant sweep --scenario <file> --param {N,h} --levels <k> [--out <file>]
    pathquant --list-suites

Exit codes: 0 all checks pass, 1 at least one check failed, 2 configuration
error.  PATHQUANT_THREADS > 1 runs the checks of a suite concurrently.
"""

import argparse
import json
import sys

from .errors import ConfigError
from .scenario import load_scenario
from .suites import checks_for_suite, convergence_sweep, list_suites, run_suite


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="pathquant",
        description="Residual verification suites for path-space symplectic structures.",
    )
    parser.add_argument(
        "--list-suites", action="store_true", help="list available suites and exit"
    )
    sub = parser.add_subparsers(dest="command")

    run_p = sub.add_parser("run", help="run a verification suite from a scenario file")
    run_p.add_argument("--scenario", required=True, help="YAML scenario file")
    run_p.add_argument("--out", default=None, help="report JSON path (overrides scenario)")
    run_p.add_argument("--csv", default=None, help="also write a flat CSV table")
    run_p.add_argument("--quiet", action="store_true", help="suppress per-check lines")

    sweep_p = sub.add_parser("sweep", help="rerun a suite under grid or step refinement")
    sweep_p.add_argument("--scenario", required=True)
    sweep_p.add_argument("--param", required=True, choices=["N", "h"])
    sweep_p.add_argument("--levels", required=True, type=int)
    sweep_p.add_argument("--out", default=None, help="write the sweep table as JSON")
    return parser


def _cmd_run(args):
    scenario = load_scenario(args.scenario)
    checks_for_suite(scenario.suite)  # validate before any work or output
    report = run_suite(scenario, out_path=args.out)
    if args.csv:
        report.write_csv(args.csv)
    if not args.quiet:
        report.print_lines()
    return 0 if report.failed == 0 else 1


def _cmd_sweep(args):
    scenario = load_scenario(args.scenario)
    checks_for_suite(scenario.suite)
    table = convergence_sweep(scenario, args.param, args.levels)
    width = max(len(k) for k in table) + 2
    header = "check".ljust(width) + "  ".join(f"level{i}" for i in range(args.levels))
    print(header + "  order")
    for cid, entry in sorted(table.items()):
        cells = "  ".join(f"{r:9.2e}" for r in entry["residuals"])
        slope = entry["slope"]
        slope_txt = slope if isinstance(slope, str) else f"{slope:.2f}"
        print(f"{cid.ljust(width)}{cells}  {slope_txt}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"parameter": args.param, "table": table}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.list_suites:
        for name in list_suites():
            print(name)
        return 0
    if args.command is None:
        parser.print_help()
        return 2
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_sweep(args)
    except ConfigError as exc:  # includes SuiteUnknownError
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
