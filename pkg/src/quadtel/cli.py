"""Command-line interface.

Subcommands map one-to-one onto the harness drivers: channel verification,
protocol runs, correction-table verification, efficiency reproduction, and
the expansion-normalization check.  Every subcommand prints a pass/fail
summary and optionally writes the full JSON report; the exit code is 0 only
if every assertion in the report passed.
"""
from __future__ import annotations

import argparse
import sys

from . import harness


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadtel",
        description="Simultaneous multiparty controlled teleportation simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare-channel", help="build the entangled channel and verify it")
    p.add_argument("--pairs", type=int, default=8, help="Bell pair count (default 8)")
    p.add_argument("--verify", action="store_true", default=True,
                   help="compare circuit against direct assembly (default on)")
    p.add_argument("--out", help="write the JSON report here")

    p = sub.add_parser("run", help="execute protocol runs")
    p.add_argument("--senders", type=int, default=4, choices=(1, 2, 3, 4))
    p.add_argument("--seed", type=int, default=0, help="seed for random inputs and sampling")
    p.add_argument("--input", dest="input_file", help="JSON file with message states")
    p.add_argument("--mode", default="sampled:16",
                   help="sampled:N | forced:SPEC | exhaustive (SPEC: 2s Bell symbols plus z, "
                        "e.g. k+,l-,k+,k+,1)")
    p.add_argument("--engine", default="structured", choices=("dense", "structured"))
    p.add_argument("--allow-large-dense", action="store_true",
                   help="opt in to dense states above 16 qubits")
    p.add_argument("--workers", type=int, default=1, help="threads for exhaustive branches")
    p.add_argument("--out", help="write the JSON report here")

    p = sub.add_parser("verify-tables", help="re-derive the correction tables and catalog map")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the JSON report here")

    p = sub.add_parser("efficiency", help="reproduce the protocol comparison table")
    p.add_argument("--out", help="write the JSON report here")

    p = sub.add_parser("verify-expansion", help="adjudicate the global-expansion prefactor")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the JSON report here")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "prepare-channel":
            report = harness.cmd_prepare_channel(args.pairs, verify=args.verify)
        elif args.command == "run":
            report = harness.cmd_run(
                senders=args.senders,
                seed=args.seed,
                input_file=args.input_file,
                mode=args.mode,
                engine=args.engine,
                allow_large_dense=args.allow_large_dense,
                workers=args.workers,
            )
        elif args.command == "verify-tables":
            report = harness.cmd_verify_tables(seed=args.seed)
        elif args.command == "efficiency":
            report = harness.cmd_efficiency()
        else:
            report = harness.cmd_verify_expansion(seed=args.seed)
    except (ValueError, OSError) as exc:
        failure = {"error": str(exc), "command": args.command}
        print(f"error: {exc}", file=sys.stderr)
        if getattr(args, "out", None):
            harness.write_report(failure, args.out)
        return 2

    print(harness.summarize(report))
    n_branches = len(report.get("branches", []))
    if n_branches:
        print(f"{n_branches} branch record(s)")
    ok = harness.report_passed(report)
    print("OK" if ok else "FAILED")
    harness.write_report(report, args.out)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
