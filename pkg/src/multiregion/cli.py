"""Command line entry point: run, validate and list scenarios."""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from typing import List, Optional

from multiregion.config import SimConfig, load_config, parse_config
from multiregion.errors import ConfigError
from multiregion.harness import report_json, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VIOLATION = 3


def builtin_names() -> List[str]:
    root = resources.files("multiregion") / "scenarios"
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def builtin_raw(name: str) -> dict:
    """Parsed JSON of a built-in scenario, for callers that want to edit it."""
    if name not in builtin_names():
        raise ConfigError("--builtin", f"unknown built-in scenario {name!r}")
    text = (resources.files("multiregion") / "scenarios" / f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)


def load_builtin(name: str) -> SimConfig:
    return parse_config(builtin_raw(name))


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multiregion", description="Deterministic multi-region streaming simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write its report")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help="path to a scenario JSON file")
    src.add_argument("--builtin", help="name of a built-in scenario")
    run.add_argument("--seed", type=int, help="override the scenario seed (unsigned 64-bit)")
    run.add_argument("--report", help="write the JSON report here instead of stdout")

    sub.add_parser("list-builtins", help="list built-in scenario names")

    val = sub.add_parser("validate", help="check a scenario file without running it")
    val.add_argument("--scenario", required=True)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list-builtins":
        for name in builtin_names():
            print(name)
        return EXIT_OK
    try:
        if args.command == "validate":
            load_config(args.scenario)
            print(f"{args.scenario}: ok")
            return EXIT_OK
        config = load_config(args.scenario) if args.scenario else load_builtin(args.builtin)
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed", "must be an unsigned 64-bit integer")
    except ConfigError as exc:
        print(f"config error: {exc.path}: {exc.message}", file=sys.stderr)
        return EXIT_CONFIG

    report = run_scenario(config, args.seed)
    text = report_json(report)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    counts = report["counts"]
    violations = report["invariant_violations"]
    print(
        f"produced={counts['produced']} consumed={counts['consumed_unique']} missing={counts['missing']} "
        f"duplicates={counts['duplicates']} alerts={counts['alerts']} violations={len(violations)}",
        file=sys.stderr,
    )
    return EXIT_VIOLATION if violations else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
