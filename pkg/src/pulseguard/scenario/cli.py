"""scenario: run a scripted end-to-end simulation and write the report."""

from __future__ import annotations

import argparse
import json
import sys
import tempfile

from pulseguard.scenario.runner import finish, run_scenario
from pulseguard.scenario.spec import load_scenario


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="scenario")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run")
    p_run.add_argument("--file", required=True, help="scenario YAML")
    p_run.add_argument("--report", required=True, help="output report JSON")
    p_run.add_argument("--workdir", default=None, help="working directory (default: temp)")
    args = parser.parse_args(argv)

    scenario = load_scenario(args.file)
    workdir = args.workdir or tempfile.mkdtemp(prefix="pulseguard-scenario-")
    report = run_scenario(scenario, workdir)
    finish(report)
    report.pop("tokens", None)
    report.pop("server_url", None)
    with open(args.report, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
    det = report["deterministic"]
    print(
        f"scenario '{report['scenario']}' done: "
        f"{det['conservation']['server_stored']} readings stored, "
        f"{len(det['alerts'])} alerts, conservation "
        f"{'holds' if det['conservation']['holds'] else 'VIOLATED'}"
    )
    return 0 if det["conservation"]["holds"] else 1


if __name__ == "__main__":
    sys.exit(main())
