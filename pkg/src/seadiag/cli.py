"""Command-line interface.

Exit codes: 0 = nominal verdict, 2 = fault detected, 1 = execution error,
so scripts can assert detection outcomes directly.
"""

import argparse
import os
import sys
from pathlib import Path

from . import _backend, detector, harness
from .errors import ConfigurationError, IntegrationFailure

OUT_DIR_ENV = "SEADIAG_OUT_DIR"


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="seadiag",
        description="Series-elastic joint simulator with model-based sensor "
                    "fault detection")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one scenario end to end")
    p_run.add_argument("--scenario", required=True, type=Path,
                       help="scenario file to execute")
    p_run.add_argument("--out", type=Path, default=None,
                       help=f"output directory for CSVs and the report "
                            f"(default: ${OUT_DIR_ENV} if set)")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
    p_run.add_argument("--override", action="append", default=[],
                       metavar="SECTION.KEY=VALUE",
                       help="override a scenario file entry (repeatable)")

    p_tune = sub.add_parser("tune", help="derive thresholds from fault-free runs")
    p_tune.add_argument("--scenarios", required=True, nargs="+", type=Path,
                        help="fault-free scenario files to run")
    p_tune.add_argument("--factor", type=float, default=3.0,
                        help="safety factor on the observed residual peaks")
    p_tune.add_argument("--seed", type=int, default=None,
                        help="override every scenario seed")

    p_val = sub.add_parser("validate", help="parse and validate a scenario file")
    p_val.add_argument("--scenario", required=True, type=Path)
    return parser


def _print_report(report):
    for name, cr in report.constraints.items():
        if cr.triggered:
            status = f"TRIGGERED at t={cr.first_crossing:.6g} s"
        else:
            status = "ok"
        print(f"{name:>10}: {status}  peak_filtered={cr.peak_filtered:.6g}  "
              f"margin={cr.margin:.3f}")
    print(f"verdict: {report.verdict}")


def _cmd_run(args):
    scenario = harness.load_scenario(args.scenario, overrides=args.override)
    if args.seed is not None:
        scenario.seed = args.seed
        scenario.noise.seed = None
        scenario.validate()
    out_dir = args.out
    if out_dir is None and os.environ.get(OUT_DIR_ENV):
        out_dir = Path(os.environ[OUT_DIR_ENV])
    result = harness.run(scenario, out_dir=out_dir)
    print(f"scenario: {scenario.label}  (seed {scenario.seed}, "
          f"backend {_backend.backend_name()})")
    _print_report(result.report)
    if out_dir is not None:
        print(f"outputs written to {out_dir}")
    return 0 if result.report.verdict == detector.VERDICT_NOMINAL else 2


def _cmd_tune(args):
    logs = []
    settling = None
    for path in args.scenarios:
        scenario = harness.load_scenario(path)
        if any(f.kind != "none" for f in scenario.faults):
            raise ConfigurationError(
                f"{path}: tune requires fault-free scenarios, found a "
                f"{scenario.faults[0].kind} fault")
        if args.seed is not None:
            scenario.seed = args.seed
            scenario.noise.seed = None
            scenario.validate()
        if settling is None:
            settling = scenario.thresholds.settling
        logs.append(harness.run(scenario).residuals)
    tuned = detector.tune_thresholds(logs, args.factor, settling=settling)
    print(f"tuned thresholds over {len(logs)} run(s), factor {args.factor:g}:")
    for name in ("torsional", "dynamics", "electrical"):
        print(f"{name:>10} = {getattr(tuned, name):.6g}")
    print(f"{'settling':>10} = {tuned.settling:.6g}")
    return 0


def _cmd_validate(args):
    scenario = harness.load_scenario(args.scenario)
    print(f"OK: {args.scenario} ({scenario.label})")
    return 0


def main(argv=None):
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "tune": _cmd_tune, "validate": _cmd_validate}
    try:
        return handlers[args.command](args)
    except (ConfigurationError, IntegrationFailure, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
