"""Utils package for the AutoPV pipeline."""

from app.utils.date import calendar_fields, ensure_utc, samples_per_day
from app.utils.errors import (
    AutoPVError,
    ConfigError,
    DataError,
    NotFoundError,
    handle_cli_error,
    serialize_error,
)
from app.utils.formatting import format_float, format_percent, format_table, format_weights
from app.utils.logging import PipelineLogger, get_logger, setup_cli_logging
from app.utils.validation import validate_model, validate_plant_ids, validate_unique_ids

__all__ = [
    # Date utilities
    "ensure_utc",
    "calendar_fields",
    "samples_per_day",
    # Error utilities
    "AutoPVError",
    "ConfigError",
    "DataError",
    "NotFoundError",
    "serialize_error",
    "handle_cli_error",
    # Formatting
    "format_float",
    "format_percent",
    "format_table",
    "format_weights",
    # Logging
    "PipelineLogger",
    "get_logger",
    "setup_cli_logging",
    # Validation utilities
    "validate_model",
    "validate_unique_ids",
    "validate_plant_ids",
]
