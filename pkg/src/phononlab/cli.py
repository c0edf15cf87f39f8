"""Command-line interface: run scenarios, list them, locate the default config."""

from __future__ import annotations

import argparse
import sys

from .config import default_config_path
from .device import ConfigError
from .scenarios import SCENARIOS, ScenarioSpec, run_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phononlab",
        description="Two-node qubit/SAW-resonator experiment simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a named scenario end to end")
    run.add_argument("scenario", choices=sorted(SCENARIOS))
    run.add_argument("--config", default=None,
                     help="device config file (default: packaged table values)")
    run.add_argument("--seed", type=int, default=1)
    run.add_argument("--shots", type=int, default=3000)
    run.add_argument("--out", default="runs/out", help="output directory")
    run.add_argument("--check", action="store_true",
                     help="evaluate acceptance thresholds; exit 1 on failure")
    run.add_argument("--plots", action="store_true", help="also emit SVG plots")
    run.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="SECTION.KEY=VALUE",
                     help="override a config value (repeatable)")

    sub.add_parser("scenarios", help="list available scenarios")
    sub.add_parser("default-config", help="print the packaged config path")
    return parser


def _parse_overrides(items: list[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"override must be SECTION.KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "scenarios":
        for name in sorted(SCENARIOS):
            print(name)
        return 0
    if args.command == "default-config":
        print(default_config_path())
        return 0

    try:
        spec = ScenarioSpec(
            name=args.scenario,
            config_path=args.config,
            seed=args.seed,
            shots=args.shots,
            out_dir=args.out,
            overrides=_parse_overrides(args.overrides),
            check=args.check,
            plots=args.plots,
        )
        report = run_scenario(spec)
    except (ConfigError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    for name, value in sorted(report.metrics.items()):
        print(f"{name}: {value}")
    for name, passed, detail in report.checks:
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    if args.check and not report.all_checks_passed:
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
