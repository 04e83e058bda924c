"""Command line entry point: ``qtomo run``, ``qtomo validate`` and ``qtomo example-config``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from .experiments import SCENARIOS, ConfigError, ExperimentConfig, format_csv, load_config, run
from .reconstruction import RankDeficient

EXIT_CONFIG = 2
EXIT_RANK = 3

log = logging.getLogger("qtomo")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qtomo", description="Ensemble qubit tomography experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario and write the CSV table")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--seed", type=int, help="override the config seed")
    p_run.add_argument("--shots", type=int, help="override the config shot count (0 = exact)")
    p_run.add_argument("--report", help="write the correlated-demo report as JSON here")

    p_val = sub.add_parser("validate", help="check a config file")
    p_val.add_argument("--config", required=True)

    p_ex = sub.add_parser("example-config", help="print the default config for a scenario")
    p_ex.add_argument("scenario", choices=SCENARIOS)
    return parser


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "shots", None) is not None:
        overrides["shots"] = args.shots
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
        cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")

    if args.command == "example-config":
        print(json.dumps(ExperimentConfig.default(args.scenario).to_dict(), indent=2))
        return 0

    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        print(f"{args.config}: ok ({cfg.scenario})")
        return 0

    try:
        rows, report = run(cfg)
    except RankDeficient as exc:
        print(f"rank deficient: {exc}", file=sys.stderr)
        return EXIT_RANK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_csv(rows))
    log.info("wrote %d rows to %s", len(rows), args.out)
    if args.report and report is not None:
        with open(args.report, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
