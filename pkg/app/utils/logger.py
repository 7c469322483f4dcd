"""
Lattice QIP - Logging System
Root logger setup with rotating file and console handlers.
"""

import logging
import logging.handlers
from pathlib import Path
from typing import Optional

import config


def setup_logging(
    log_file: Optional[Path] = None,
    level: Optional[str] = None,
    quiet: bool = False,
) -> logging.Logger:
    """
    Set up application-wide logging with console and optional file handlers.

    Args:
        log_file: Path of a rotating log file (no file logging if None)
        level: Log level name (defaults to config.LOG_LEVEL, DEBUG in debug mode)
        quiet: Only show warnings and errors on the console

    Returns:
        The configured root logger
    """
    default_level = "DEBUG" if config.DEBUG_MODE else config.LOG_LEVEL
    level_name = (level or default_level).upper()
    root_logger = logging.getLogger()
    root_logger.setLevel(getattr(logging, level_name, logging.INFO))

    # Clear any existing handlers
    root_logger.handlers.clear()

    # Console handler (stderr keeps stdout free for reports)
    console_handler = logging.StreamHandler()
    console_handler.setLevel(logging.WARNING if quiet else root_logger.level)
    console_handler.setFormatter(logging.Formatter("%(levelname)s - %(message)s"))
    root_logger.addHandler(console_handler)

    # File handler
    if log_file is not None:
        log_file = Path(log_file)
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            log_file,
            maxBytes=config.LOG_MAX_BYTES,
            backupCount=config.LOG_BACKUP_COUNT,
            encoding="utf-8",
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(
            logging.Formatter(config.LOG_FORMAT, datefmt=config.LOG_DATE_FORMAT)
        )
        root_logger.addHandler(file_handler)
        logging.debug(f"Log file: {log_file}")

    logging.debug(f"{config.APP_NAME} v{config.APP_VERSION} - Logging initialized")
    return root_logger


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger instance for a specific module.

    Args:
        name: Module name (typically __name__)

    Returns:
        Logger instance
    """
    return logging.getLogger(name)
