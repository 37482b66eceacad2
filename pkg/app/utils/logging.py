"""Logging utilities for the AutoPV toolkit."""

import logging
import sys
from datetime import datetime
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pythonjsonlogger import jsonlogger

# Constants
DEFAULT_LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DEFAULT_JSON_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"
ROOT_LOGGER_NAME = "autopv"


def _qualified(name: str) -> str:
    if name == ROOT_LOGGER_NAME or name.startswith(f"{ROOT_LOGGER_NAME}."):
        return name
    return f"{ROOT_LOGGER_NAME}.{name}"


class PipelineLogger:
    """
    Logger wrapper used across the toolkit.
    Supports plain text and JSON output; keyword context is attached to
    every record as structured fields.

    Only the ``autopv`` root logger owns handlers; module loggers propagate
    to it, so reconfiguring the root affects loggers created at import time.
    """

    def __init__(
        self,
        name: str,
        log_level: int = logging.INFO,
        use_json: bool = False,
        log_to_file: bool = False,
        log_file_path: Optional[Union[str, Path]] = None,
        configure: bool = True,
    ):
        """
        Create the logger.

        Args:
            name: Logger name (namespaced under ``autopv``)
            log_level: Logging level
            use_json: Emit JSON records
            log_to_file: Also write to a rotating file
            log_file_path: Path of the log file when log_to_file is set
            configure: Attach handlers; False for propagating module loggers
        """
        self.logger = logging.getLogger(_qualified(name))
        if not configure:
            return

        self.logger.setLevel(log_level)
        self.logger.handlers = []  # Clear existing handlers
        self.logger.propagate = False

        console_handler = logging.StreamHandler(sys.stderr)

        if use_json:
            formatter = self._create_json_formatter()
        else:
            formatter = logging.Formatter(DEFAULT_LOG_FORMAT)

        console_handler.setFormatter(formatter)
        self.logger.addHandler(console_handler)

        if log_to_file:
            if not log_file_path:
                log_dir = Path("logs")
                log_dir.mkdir(exist_ok=True)
                log_file_path = log_dir / f"{ROOT_LOGGER_NAME}.log"

            file_handler = RotatingFileHandler(
                log_file_path, maxBytes=10485760, backupCount=5
            )
            file_handler.setFormatter(formatter)
            self.logger.addHandler(file_handler)

    def _create_json_formatter(self) -> jsonlogger.JsonFormatter:
        """
        Create the JSON formatter.

        Returns:
            JSON formatter instance
        """
        return jsonlogger.JsonFormatter(
            DEFAULT_JSON_FORMAT,
            rename_fields={"levelname": "level", "asctime": "timestamp"},
            json_default=lambda o: (
                o.isoformat() if isinstance(o, datetime) else str(o)
            ),
        )

    def _emits_json(self) -> bool:
        root = logging.getLogger(ROOT_LOGGER_NAME)
        return any(
            isinstance(h.formatter, jsonlogger.JsonFormatter)
            for h in root.handlers + self.logger.handlers
        )

    def _log(self, level: int, msg: str, **kwargs) -> None:
        if not self.logger.isEnabledFor(level):
            return
        if kwargs and not self._emits_json():
            context = " ".join(f"{k}={v}" for k, v in kwargs.items())
            msg = f"{msg} [{context}]"
        self.logger.log(level, msg, extra=kwargs)

    # Forward log methods to the underlying logger
    def debug(self, msg: str, **kwargs):
        """Log debug message."""
        self._log(logging.DEBUG, msg, **kwargs)

    def info(self, msg: str, **kwargs):
        """Log info message."""
        self._log(logging.INFO, msg, **kwargs)

    def warning(self, msg: str, **kwargs):
        """Log warning message."""
        self._log(logging.WARNING, msg, **kwargs)

    def error(self, msg: str, **kwargs):
        """Log error message."""
        self._log(logging.ERROR, msg, **kwargs)

    def exception(self, msg: str, **kwargs):
        """Log exception with traceback."""
        self.logger.exception(msg, extra=kwargs)


def setup_cli_logging(config: Dict[str, Any]) -> PipelineLogger:
    """
    Configure the ``autopv`` root logger for a command line run.

    Args:
        config: Dict with ``log_level``, ``use_json``, ``log_to_file`` and
            ``log_file_path``

    Returns:
        The configured root logger

    Examples:
        >>> logger = setup_cli_logging({"log_level": "DEBUG", "use_json": True})
        >>> logger.info("run started", command="generate")
    """
    log_level = getattr(
        logging, str(config.get("log_level", "INFO")).upper(), logging.INFO
    )
    logger = PipelineLogger(
        ROOT_LOGGER_NAME,
        log_level=log_level,
        use_json=bool(config.get("use_json", False)),
        log_to_file=bool(config.get("log_to_file", False)),
        log_file_path=config.get("log_file_path"),
    )
    logger.debug("Logging configured", log_level=logging.getLevelName(log_level))
    return logger


def get_logger(name: str) -> PipelineLogger:
    """
    Get a module logger that propagates to the ``autopv`` root logger.

    Args:
        name: Module or component name

    Returns:
        PipelineLogger instance

    Examples:
        >>> logger = get_logger("cash")
        >>> logger.info("trial finished", trial=3, validation_mse=0.012)
    """
    root = logging.getLogger(ROOT_LOGGER_NAME)
    if not root.handlers:
        PipelineLogger(ROOT_LOGGER_NAME)
    return PipelineLogger(name, configure=False)
