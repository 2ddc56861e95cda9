"""Command line: run the pipeline, evaluate ring expressions, check groups.

Exit codes: 0 on success (hypothesis failures are report data, not errors),
2 for configuration or input problems, 3 for internal numeric failures.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from lyapcenter.euler_ring import parse_euler_expr
from lyapcenter.pipeline import ConfigError, NumericFailure, RunConfig, run
from lyapcenter.symmetry import FinitePermGroup, check_admissible_finite

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _cmd_run(args) -> int:
    config = RunConfig.from_toml(args.config)
    report = run(config, json_out=args.json_out, csv_dir=args.csv_dir)
    wrote = args.json_out or config.outputs.report_path
    if wrote:
        for entry in report.orbit_reports:
            point = ", ".join(f"{c:.6g}" for c in entry["point"])
            print(f"orbit {entry['index']} at ({point}): {entry['verdict']}")
        print(f"report written to {wrote}")
    else:
        sys.stdout.write(report.json_text())
    return EXIT_OK


def _cmd_euler(args) -> int:
    print(parse_euler_expr(args.expr).text())
    return EXIT_OK


def _cmd_check_group(args) -> int:
    try:
        group = FinitePermGroup.from_json(args.table)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot load group table: {exc}") from exc
    names = [s.strip() for s in args.subgroup.split(",") if s.strip()]
    if not names:
        raise ConfigError("--subgroup needs a comma-separated element list")
    index = {name: i for i, name in enumerate(group.names)}
    unknown = [s for s in names if s not in index]
    if unknown:
        raise ConfigError(f"element names {unknown} not in the table "
                          f"(names: {', '.join(group.names)})")
    subgroup = group.closure([index[s] for s in names])
    verdict = check_admissible_finite(group, subgroup)

    members = ", ".join(group.names[i] for i in sorted(subgroup))
    print(f"subgroup generated: {{{members}}} (order {len(subgroup)})")
    print(f"admissible: {'yes' if verdict.admissible else 'no'}")
    if verdict.reason:
        print(f"reason: {verdict.reason}")
    if not verdict.admissible:
        k1, k2 = verdict.witness

        def fmt(s):
            return "{" + ", ".join(group.names[i] for i in sorted(s)) + "}"

        print(f"witness pair: {fmt(k1)} and {fmt(k2)}")
        print("fused by conjugation with: "
              f"{group.names[verdict.witness_conjugator]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lyapcenter",
        description=("Find critical orbits of a symmetric potential, certify "
                     "the center-theorem bifurcation, and exhibit the "
                     "periodic orbits."))
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the full pipeline from a TOML config")
    p_run.add_argument("config", help="path to the TOML run configuration")
    p_run.add_argument("--json-out", default=None,
                       help="write the JSON report here (overrides the config)")
    p_run.add_argument("--csv-dir", default=None,
                       help="write one trajectory CSV per solution here")
    p_run.set_defaults(func=_cmd_run)

    p_euler = sub.add_parser("euler",
                             help="evaluate an Euler-ring expression")
    p_euler.add_argument("expr",
                         help="e.g. 'inv(-I + 2*Z3) * (-I + 2*Z3)' or "
                              "'chi(S^\"R[1,0]+R[2,3]\")'")
    p_euler.set_defaults(func=_cmd_euler)

    p_grp = sub.add_parser("check-group",
                           help="admissibility of a subgroup from a JSON table")
    p_grp.add_argument("table", help="JSON file with {order, table, names}")
    p_grp.add_argument("--subgroup", required=True,
                       help="comma-separated element names generating H")
    p_grp.set_defaults(func=_cmd_check_group)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # covers expression parse errors and malformed inputs
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericFailure, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
