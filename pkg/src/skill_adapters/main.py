import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from skill_adapters.cli.commands import create_command_definitions
from skill_adapters.cli.definitions import CommandDefinition
from skill_adapters.cli.lab import Lab
from skill_adapters.cli.register import register_commands
from skill_adapters.config.config import load_config
from skill_adapters.config.settings import LabSettings, validate_settings
from skill_adapters.errors import ConfigError
from skill_adapters.tensorcore.tensor import set_debug_numerics

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skill-adapters",
        description="Continual skill transfer with adapters on a small retrieval encoder.",
    )
    parser.add_argument("--config", type=Path, help="JSON or YAML run configuration")
    parser.add_argument("--seed", type=int, help="override the run seed")
    parser.add_argument("--output-dir", type=Path, help="override the output directory")
    parser.add_argument("--log-level", help="logging level (default INFO)")
    subparsers = parser.add_subparsers(dest="command_name", required=True)
    register_commands(subparsers, create_command_definitions())
    return parser


def _output_dir(args: argparse.Namespace, settings: LabSettings, configured: Path) -> Path:
    if args.output_dir is not None:
        return args.output_dir
    if "output_dir" in settings.model_fields_set:
        return settings.output_dir
    return configured


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    try:
        settings = LabSettings()
        if args.log_level:
            settings.log_level = args.log_level.strip().upper()
        validate_settings(settings)
    except ValueError as e:
        print(str(e), file=sys.stderr)
        return EXIT_CONFIG

    logging.basicConfig(
        level=settings.log_level_number,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    set_debug_numerics(settings.debug_numerics)
    if getattr(args, "workers", 0) is None:
        args.workers = settings.workers
    args.debug_numerics = settings.debug_numerics

    try:
        run = load_config(args.config or settings.config_path)
        if args.seed is not None:
            run = run.with_seed(args.seed)
        lab = Lab(run, _output_dir(args, settings, run.output_dir))
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    definition: CommandDefinition = args.command
    try:
        return definition.fn(lab, args)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:
        logger.debug("Command failed", exc_info=True)
        message = " ".join(str(e).split()) or type(e).__name__
        print(f"{definition.name.value} failed: {message}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
