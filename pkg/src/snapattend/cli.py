"""Command-line harness.

    snapattend seed   <scenario> --db attend.db
    snapattend run    <scenario> [--mode in_process|networked] [--json out.json]
    snapattend oracle <scenario> [--json out.json]
    snapattend diff   <report.json> <report.json>

Exit codes: 0 ok, 1 attendance tables mismatch the oracle, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys

from .backend import seed_from_scenario
from .errors import SnapAttendError
from .scenario import load_scenario
from .simulator import (
    COURSE_ID,
    RunReport,
    SimPolicies,
    diff_reports,
    oracle_attendance,
    run_scenario,
)
from .store import Database

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INVALID = 2


def _policies(args) -> SimPolicies:
    return SimPolicies(
        default_threshold_n=args.threshold,
        required_percent=args.required,
        tau=getattr(args, "tau", SimPolicies.tau),
    )


def _add_policy_flags(p):
    p.add_argument("--threshold", type=int, default=3,
                   help="course default threshold n (blocks)")
    p.add_argument("--required", type=int, default=75,
                   help="course attendance requirement (percent)")


def _print_report(report: RunReport, out=None):
    out = out if out is not None else sys.stdout
    print(f"mode: {report.mode}   wall: {report.wall_seconds:.2f}s   "
          f"virtual: {report.virtual_minutes} min", file=out)
    print(f"{'session':<10} {'present':>8} {'enrolled':>9}", file=out)
    for g in sorted(report.sessions):
        row = report.sessions[g]
        mark = "  FAILED" if g in report.failed_sessions else ""
        print(f"{g:<10} {sum(row.values()):>8} {len(row):>9}{mark}", file=out)
    print(f"recognition errors vs oracle: {report.false_absent} false absent, "
          f"{report.false_present} false present", file=out)


def _write_json(report: RunReport, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_doc(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_seed(args) -> int:
    scenario = load_scenario(args.scenario)
    db = Database(args.db)
    seed_from_scenario(
        db, scenario,
        default_threshold_n=args.threshold, required_percent=args.required,
    )
    n_sessions = len(scenario.sessions)
    print(f"seeded {args.db}: course {COURSE_ID}, {len(scenario.student_ids)} students, "
          f"{n_sessions} sessions")
    return EXIT_OK


def cmd_run(args) -> int:
    report = run_scenario(
        args.scenario,
        mode=args.mode,
        policies=_policies(args),
        db_path=args.db,
        max_workers=args.workers,
        timeout=args.timeout,
    )
    _print_report(report)
    if args.json:
        _write_json(report, args.json)
        print(f"report written to {args.json}")
    if report.failed_sessions or report.recognition_errors:
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_oracle(args) -> int:
    scenario = load_scenario(args.scenario)
    report = oracle_attendance(scenario, _policies(args))
    _print_report(report)
    if args.json:
        _write_json(report, args.json)
        print(f"report written to {args.json}")
    return EXIT_OK


def cmd_diff(args) -> int:
    reports = []
    for path in (args.report_a, args.report_b):
        try:
            with open(path, encoding="utf-8") as fh:
                reports.append(RunReport.from_doc(json.load(fh)))
        except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise SnapAttendError(f"cannot read report {path}: {exc}") from None
    differences = diff_reports(reports[0], reports[1])
    if differences:
        for line in differences:
            print(line)
        print(f"{len(differences)} difference(s)")
        return EXIT_MISMATCH
    print("reports agree")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snapattend",
        description="Run snapshot-attendance scenarios and check them against the oracle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("seed", help="populate a database from a scenario")
    p.add_argument("scenario")
    p.add_argument("--db", default="snapattend.db")
    _add_policy_flags(p)
    p.set_defaults(func=cmd_seed)

    p = sub.add_parser("run", help="execute a scenario end to end and score it")
    p.add_argument("scenario")
    p.add_argument("--mode", choices=("in_process", "networked"), default="in_process")
    p.add_argument("--json", help="write the machine-readable report here")
    p.add_argument("--db", help="database path (default: fresh temp file)")
    p.add_argument("--workers", type=int, default=32,
                   help="concurrent recognition workers (in_process mode)")
    p.add_argument("--timeout", type=float, default=120.0)
    p.add_argument("--tau", type=float, default=SimPolicies.tau,
                   help="matcher acceptance threshold")
    _add_policy_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("oracle", help="compute ground-truth attendance tables")
    p.add_argument("scenario")
    p.add_argument("--json", help="write the oracle report here")
    _add_policy_flags(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("diff", help="compare two report files")
    p.add_argument("report_a")
    p.add_argument("report_b")
    p.set_defaults(func=cmd_diff)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SnapAttendError as exc:
        print(f"error ({exc.code}): {exc.message}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except TimeoutError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
