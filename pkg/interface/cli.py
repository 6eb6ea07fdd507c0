import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import pandas as pd
from dotenv import load_dotenv
from pydantic import ValidationError

from core.models.experiment_models import REQUIRED_SECTIONS, ConfigValidationError, validate_experiment_config
from core.utils.config_parser import PROJECT_ROOT, load_app_config, load_experiment_file
from core.utils.seeding import MAX_SEED
from core.workflows.orchestrator import ExperimentOrchestrator

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


class _UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    """argparse that reports usage problems as exit code 1 instead of 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="geomconc",
        description="Component counts of random geometric graphs: sampling, tail bounds and regime limits.",
    )
    parser.add_argument("subcommand", choices=sorted(REQUIRED_SECTIONS), help="Experiment to run.")
    parser.add_argument("--config", required=True, type=Path, help="Experiment file (JSON or YAML).")
    parser.add_argument("--out", type=Path, default=None, help="Output directory (default: config 'output' or ./results).")
    parser.add_argument("--seed", type=int, default=None, help="Master seed, overrides the config.")
    parser.add_argument("--threads", type=int, default=None, help="Thread-pool size, overrides config and GEOMCONC_THREADS.")
    parser.add_argument("--log-level", default="INFO", help="Logging level.")
    return parser


def print_summary(subcommand: str, summary: dict, outputs: List[str]) -> None:
    frame = pd.DataFrame({"key": list(summary), "value": [str(v) for v in summary.values()]})
    print(f"\n--- geomconc {subcommand} ---")
    print(frame.to_markdown(index=False, tablefmt="grid"))
    if "violations" in summary:
        print(f"violations: {summary['violations']}")
    for path in outputs:
        print(f"wrote {path}")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_USAGE

    load_dotenv(PROJECT_ROOT / ".env")
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stdout,
    )

    try:
        raw = load_experiment_file(args.config)
        if args.seed is not None:
            if not 0 <= args.seed <= MAX_SEED:
                raise ConfigValidationError("config.master_seed", f"seed must lie in [0, {MAX_SEED}]")
            raw["master_seed"] = args.seed
        if args.threads is not None:
            raw["threads"] = args.threads
        config = validate_experiment_config(raw)
        config.require(args.subcommand)
        app_config = load_app_config()
    except (ConfigValidationError, ValidationError) as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_VALIDATION
    except (FileNotFoundError, ValueError) as e:
        logger.error(f"Could not load configuration: {e}")
        return EXIT_VALIDATION

    out_dir = args.out or Path(config.output or "results")
    try:
        orchestrator = ExperimentOrchestrator(app_config, config, out_dir)
        result = orchestrator.run(args.subcommand)
    except ConfigValidationError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_VALIDATION
    except (ValueError, RuntimeError, NotImplementedError) as e:
        logger.error(f"'{args.subcommand}' failed: {e}")
        return EXIT_RUNTIME

    print_summary(args.subcommand, result["summary"], result["outputs"])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
