"""
Lattice QIP - Base Command Class
Abstract base class for all subcommands of the command-line interface.
"""

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import pandas as pd
from tqdm import tqdm

from app.core.workers.base_worker import BaseWorker
from app.utils.file_helpers import save_dataframe, write_json
from app.utils.logger import get_logger
from app.utils.run_config import RunConfig
import config


@dataclass
class CommandContext:
    """Runtime options shared by every subcommand."""

    out_dir: Path
    jobs: int = 1
    quiet: bool = False
    args: Optional[argparse.Namespace] = None


@dataclass
class CommandResult:
    """
    What a subcommand produced.

    Attributes:
        results: Structured results embedded in <command>.json
        text: Human-readable report printed on stdout
        tables: CSV outputs keyed by file name
    """

    results: Dict[str, Any] = field(default_factory=dict)
    text: str = ""
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)


class BaseCommand:
    """
    Abstract base class for all subcommands.

    Subclasses set `name` and `help`, may add arguments and config
    overrides, and implement execute().
    """

    name: str = ""
    help: str = ""

    def __init__(self):
        """Initialize the base command."""
        # Set up logger for this command
        self.logger = get_logger(self.__class__.__name__)

        self.logger.debug(f"{self.__class__.__name__} initialized")

    def add_arguments(self, parser: argparse.ArgumentParser):
        """
        Add subcommand-specific arguments.

        Can be overridden by subclasses.
        """
        pass

    def config_overrides(self, args: argparse.Namespace) -> Dict[str, Any]:
        """
        Section overrides taken from the command line, merged into the run
        configuration before validation.

        Can be overridden by subclasses.
        """
        return {}

    def execute(self, run_config: RunConfig, context: CommandContext) -> CommandResult:
        """
        Run the subcommand.

        Must be implemented by subclasses.
        """
        raise NotImplementedError("Subclasses must implement execute()")

    def run_worker(self, worker: BaseWorker, context: CommandContext, description: str) -> Any:
        """
        Run a worker synchronously with a tqdm bar bound to its progress.

        Returns:
            Worker result

        Raises:
            The worker's error, if any
        """
        disable = context.quiet or not sys.stderr.isatty()
        with tqdm(total=100, desc=description, unit="%", disable=disable, leave=False) as bar:
            def on_progress(value, message):
                bar.update(value - bar.n)

            worker.on_progress(on_progress)
            worker.on_status(self.on_status_change)
            return worker.execute()

    def on_status_change(self, status_message: str):
        """
        Handle worker status messages.

        Args:
            status_message: Status message to log
        """
        self.logger.info(status_message)

    def write_outputs(
        self,
        result: CommandResult,
        run_config: RunConfig,
        context: CommandContext,
    ) -> Path:
        """
        Write <command>.json and the CSV tables into the output directory.

        Returns:
            Path of the JSON record
        """
        for file_name, table in result.tables.items():
            save_dataframe(table, context.out_dir / file_name, float_format="%.10g")

        record = {
            'schema_version': config.SCHEMA_VERSION,
            'command': self.name,
            'config': run_config.model_dump(mode="json"),
            'results': result.results,
            'seed': run_config.seed,
        }
        return write_json(record, context.out_dir / f"{self.name}.json")
