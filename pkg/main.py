"""
SAR product toolkit command line
Simulate, focus, form products and assess quality for a scenario file
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / "src"))

from src.config import load_config  # noqa: E402
from src.config.scenario import STAGE_ORDER, scenario_schema  # noqa: E402
from src.core.base_stage import EXIT_CODES  # noqa: E402
from src.core.exceptions import SarError, ValidationError  # noqa: E402
from src.core.models import QualityReport  # noqa: E402
from src.processing.quality import format_table  # noqa: E402
from src.utils.logger import setup_logging  # noqa: E402
from src.workflow import run_pipeline  # noqa: E402

logger = logging.getLogger(__name__)

SUBCOMMANDS = list(STAGE_ORDER)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sarkit",
        description="Simulate, focus and assess SAR products from a scenario file",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="Scenario JSON file")
    common.add_argument("--output-dir", default=None, help="Run directory (overrides the scenario)")
    common.add_argument("--seed", type=int, default=None, help="Seed override")
    common.add_argument("--threads", type=int, default=None, help="Worker threads (overrides SARKIT_THREADS)")
    common.add_argument("--runtime-config", default=None, help="Runtime config JSON (logging, threads, plots)")
    common.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")

    sub.add_parser("run", parents=[common], help="Run the stages listed in the scenario")
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=f"Run the {name} stage on persisted intermediates")
    sub.add_parser("schema", help="Print the scenario JSON schema")
    return parser


def run_command(args: argparse.Namespace) -> int:
    """
    Execute one CLI command

    Returns:
        Process exit code
    """
    if args.command == "schema":
        print(json.dumps(scenario_schema(), indent=2))
        return 0

    try:
        config = load_config(args.runtime_config)
    except ValidationError as e:
        print(f"\nConfiguration error: {e}\n", file=sys.stderr)
        return EXIT_CODES["config"]

    setup_logging(
        level=args.log_level or config.logging.level,
        format_string=config.logging.format,
        log_file=config.logging.file,
        console=config.logging.console,
    )

    stages: Optional[List[str]] = None
    if args.command != "run":
        stages = [args.command] if args.command == "report" else [args.command, "report"]

    try:
        code, state = run_pipeline(
            args.config,
            output_dir=args.output_dir,
            seed=args.seed,
            threads=args.threads,
            stages=stages,
            command=args.command,
        )
    except ValidationError as e:
        logger.error(f"Configuration error: {e}")
        print(f"\nConfiguration error: {e}\n", file=sys.stderr)
        return EXIT_CODES["config"]
    except SarError as e:
        logger.error(f"Run failed: {e}", exc_info=True)
        return 1

    if state.get("quality"):
        print(format_table(QualityReport(**state["quality"])))
    if state.get("error"):
        error = state["error"]
        print(f"\nStage {error['stage']} failed ({error['code']}): {error['message']}\n", file=sys.stderr)
    return code


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    args = build_parser().parse_args(argv)
    return run_command(args)


if __name__ == "__main__":
    sys.exit(main())
