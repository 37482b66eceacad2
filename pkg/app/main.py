"""
Command line entry point.

    python -m app.main generate --config config/autopv.yaml
    python -m app.main pretrain
    python -m app.main simulate --plant plant_03
    python -m app.main evaluate --workers 4
    python -m app.main report
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from app.cli.commands import (
    cmd_evaluate,
    cmd_generate,
    cmd_pretrain,
    cmd_report,
    cmd_simulate,
)
from app.core.config import settings
from app.utils.config import apply_overrides, load_run_config, resolve_paths
from app.utils.errors import handle_cli_error
from app.utils.logging import setup_cli_logging

COMMANDS = ["generate", "pretrain", "simulate", "evaluate", "report"]

# CLI option -> dotted RunConfig field
OVERRIDES = {
    "data_dir": "paths.data_dir",
    "model_dir": "paths.model_dir",
    "report_dir": "paths.report_dir",
    "cycle_days": "adaptation.cycle_days",
    "window_samples": "adaptation.window_samples",
    "pool_size": "adaptation.pool_size",
    "own_model_after_days": "adaptation.own_model_after_days",
    "fleet_seed": "seeds.fleet",
    "seed": "seeds.run",
    "days": "fleet.days",
    "plant_count": "fleet.plant_count",
    "latitude": "fleet.latitude",
    "pretrain_days": "split.pretrain_days",
    "test_days": "split.test_days",
    "max_trials": "cash.max_trials",
    "workers": "workers",
    "log_level": "logging.log_level",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="autopv",
        description=f"{settings.PROJECT_NAME} {settings.VERSION}",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="YAML or JSON run configuration")
    parser.add_argument("--plant", help="Target plant of the simulate command")

    paths = parser.add_argument_group("paths")
    paths.add_argument("--data-dir")
    paths.add_argument("--model-dir")
    paths.add_argument("--report-dir")

    run = parser.add_argument_group("run")
    run.add_argument("--cycle-days", type=int, help="Days between adaptations (C)")
    run.add_argument("--window-samples", type=int, help="Adaptation window (K)")
    run.add_argument("--no-adapt", action="store_true", help="Keep equal weights")
    run.add_argument("--pool-size", type=int, help="Diverse pool models kept per target")
    run.add_argument(
        "--own-model-after-days", type=int, help="simulate: day the own model joins the pool"
    )
    run.add_argument("--fleet-seed", type=int)
    run.add_argument("--seed", type=int, help="Search and training seed")
    run.add_argument("--days", type=int, help="Days of the generated fleet")
    run.add_argument("--plant-count", type=int)
    run.add_argument("--latitude", type=float)
    run.add_argument("--pretrain-days", type=int)
    run.add_argument("--test-days", type=int)
    run.add_argument("--max-trials", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument(
        "--consistency", action="store_true", help="report: include the consistency table"
    )

    logs = parser.add_argument_group("logging")
    logs.add_argument("--log-level")
    logs.add_argument("--json-logs", action="store_true")
    return parser


def collect_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides = {field: getattr(args, option) for option, field in OVERRIDES.items()}
    if args.no_adapt:
        overrides["adaptation.enabled"] = False
    if args.json_logs:
        overrides["logging.use_json"] = True
    return overrides


def config_file(args: argparse.Namespace) -> Optional[str]:
    """Explicit --config, else the settings default when it exists."""
    if args.config:
        return args.config
    return settings.CONFIG_FILE if Path(settings.CONFIG_FILE).exists() else None


def run(args: argparse.Namespace) -> int:
    config = load_run_config(config_file(args), defaults=settings.run_defaults())
    config = apply_overrides(config, collect_overrides(args))
    logger = setup_cli_logging(config.logging.model_dump())
    resolve_paths(config)
    logger.info("Command started", command=args.command)

    if args.command == "generate":
        outputs = cmd_generate(config)
    elif args.command == "pretrain":
        outputs = cmd_pretrain(config)
    elif args.command == "simulate":
        outputs = cmd_simulate(config, args.plant)
    elif args.command == "evaluate":
        outputs = cmd_evaluate(config)
    else:
        print(cmd_report(config, consistency=args.consistency), end="")
        outputs = []

    for path in outputs:
        print(path)
    logger.info("Command finished", command=args.command, outputs=len(outputs))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and not args.plant:
        parser.error("simulate requires --plant")
    try:
        return run(args)
    except Exception as e:
        return handle_cli_error(e)


if __name__ == "__main__":
    sys.exit(main())
