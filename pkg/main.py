"""
Lattice QIP - Application Entry Point
Command-line entry point dispatching to the subcommands.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import config
from app.cli import COMMANDS
from app.cli.base_command import CommandContext
from app.core.errors import LatticeQipError
from app.utils.config_manager import get_config_manager
from app.utils.file_helpers import FileReadError
from app.utils.logger import setup_logging
from app.utils.validators import ValidationError


EXIT_OK = 0
EXIT_USER_ERROR = 2
EXIT_IO_ERROR = 3


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with the common flags on every subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="YAML run configuration")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    common.add_argument("--seed", type=int, default=None, help="random seed (overrides the config)")
    common.add_argument(
        "--jobs", type=int, default=config.DEFAULT_JOBS,
        help="parallel workers (default: number of processors)",
    )
    common.add_argument("--quiet", action="store_true", help="only warnings and errors on the console")
    common.add_argument("--log-file", type=Path, default=None, help="also log to this file")

    parser = argparse.ArgumentParser(
        prog="lattice-qip",
        description=f"{config.APP_NAME} v{config.APP_VERSION}",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {config.APP_VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name, command_class in COMMANDS.items():
        command = command_class()
        sub = subparsers.add_parser(name, parents=[common], help=command_class.help)
        command.add_arguments(sub)
        sub.set_defaults(handler=command)

    return parser


def run(args: argparse.Namespace) -> int:
    """Resolve the configuration, run one subcommand and write its outputs."""
    command = args.handler
    if args.jobs < 1:
        raise ValidationError(f"--jobs must be at least 1, got {args.jobs}")

    manager = get_config_manager()
    manager.load(args.config)
    overrides = {'seed': args.seed}
    overrides.update(command.config_overrides(args))
    run_config = manager.resolve(overrides)
    manager.apply_species_overrides(run_config)

    context = CommandContext(out_dir=args.out, jobs=args.jobs, quiet=args.quiet, args=args)
    logging.info(f"Running '{command.name}' (seed {run_config.seed}, jobs {args.jobs})")

    result = command.execute(run_config, context)
    record_path = command.write_outputs(result, run_config, context)

    if result.text:
        print(result.text)
    logging.info(f"Results written to {record_path}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main application entry point.

    Returns:
        0 on success, 2 on configuration or input errors, 3 on I/O errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 for --help/--version
        return int(e.code or 0)

    setup_logging(log_file=args.log_file, quiet=args.quiet)

    try:
        return run(args)
    except (ValidationError, LatticeQipError) as e:
        logging.error(str(e))
        return EXIT_USER_ERROR
    except (FileReadError, OSError) as e:
        logging.error(str(e))
        return EXIT_IO_ERROR
    except ValueError as e:
        logging.error(f"Invalid input: {e}")
        return EXIT_USER_ERROR


if __name__ == "__main__":
    sys.exit(main())
