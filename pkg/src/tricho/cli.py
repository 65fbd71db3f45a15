"""Command-line front end: parse a scenario, run its checks, emit reports.

Exit codes: 0 all requested checks passed, 1 at least one check failed or
was skipped behind a failure, 2 scenario/parse/setup error.
"""
from __future__ import annotations

import argparse
import sys
import time

from .errors import PreconditionError, ScenarioError, StructuralError
from .runner import emit, run
from .scenario import parse_scenario


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tricho",
        description="Verify trichotomy/dichotomy inequality systems and "
                    "Lyapunov-type norm characterizations for an evolution "
                    "operator scenario at grid scale.")
    parser.add_argument("--scenario", required=True, help="scenario JSON file")
    parser.add_argument("--out", default="report",
                        help="output directory (default: ./report)")
    parser.add_argument("--format", default="both",
                        choices=["json", "csv", "both"],
                        help="report format (default: both)")
    parser.add_argument("--grid-max", type=float, default=None,
                        help="override grid.t_max")
    parser.add_argument("--grid-step", type=float, default=None,
                        help="override grid.step")
    parser.add_argument("--horizon", type=float, default=None,
                        help="override the future-supremum horizon")
    parser.add_argument("--tol", type=float, default=None,
                        help="override tolerances.theorem")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the sampling seed")
    return parser


def _apply_overrides(scenario, args) -> None:
    if args.grid_max is not None:
        if args.grid_max <= 0:
            raise ScenarioError("--grid-max must be positive")
        scenario.grid_max = args.grid_max
        scenario.echo.setdefault("grid", {})["t_max"] = args.grid_max
    if args.grid_step is not None:
        if args.grid_step <= 0:
            raise ScenarioError("--grid-step must be positive")
        scenario.grid_step = args.grid_step
        scenario.echo.setdefault("grid", {})["step"] = args.grid_step
    if args.horizon is not None:
        if args.horizon <= 0:
            raise ScenarioError("--horizon must be positive")
        scenario.horizon = args.horizon
        scenario.echo["horizon"] = args.horizon
    if args.tol is not None:
        if args.tol <= 0:
            raise ScenarioError("--tol must be positive")
        scenario.tol_theorem = args.tol
        scenario.echo.setdefault("tolerances", {})["theorem"] = args.tol
    if args.seed is not None:
        scenario.seed = args.seed
        scenario.echo["seed"] = args.seed


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        scenario = parse_scenario(args.scenario)
        _apply_overrides(scenario, args)
        report = run(scenario)
    except (ScenarioError, StructuralError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    paths = emit(report, args.format, args.out)
    for entry in report.checks:
        elapsed = report.timing.get(entry["name"])
        suffix = f" ({elapsed:.3f}s)" if elapsed is not None else ""
        print(f"[{entry['status']:>7}] {entry['name']}{suffix}")
    print(f"overall: {report.overall}")
    print(f"wrote {', '.join(str(p) for p in paths)} "
          f"in {time.perf_counter() - started:.3f}s")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
