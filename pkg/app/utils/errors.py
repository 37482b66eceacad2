"""Error handling utilities for the AutoPV toolkit."""

import sys
from typing import Any, Dict, List, Optional, TextIO, Union

# Exit code categories used by the command line
EXIT_OK = 0
EXIT_GENERIC = 1
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NOT_FOUND = 4
EXIT_SEARCH = 5


class AutoPVError(Exception):
    """
    Base class for all AutoPV errors.

    Attributes:
        message: Human readable error message
        error_code: Stable machine readable code
        exit_code: Process exit code used by the CLI
        details: Structured context about the failure
    """

    def __init__(
        self,
        message: str,
        error_code: str = "AUTOPV_ERROR",
        exit_code: int = EXIT_GENERIC,
        details: Optional[Dict[str, Any]] = None,
    ):
        self.message = message
        self.error_code = error_code
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)


class ConfigError(AutoPVError):
    """Configuration loading or validation failed."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            error_code="CONFIG_ERROR",
            exit_code=EXIT_CONFIG,
            details=details,
        )


class NotFoundError(AutoPVError):
    """
    A required resource (file, plant, model bundle) does not exist.

    Attributes:
        resource: Name of the resource kind
        resource_id: Identifier of the missing resource
    """

    def __init__(self, resource: str, resource_id: Optional[str] = None):
        message = f"{resource} not found"
        if resource_id:
            message = f"{resource} {resource_id} not found"

        super().__init__(
            message=message,
            error_code="NOT_FOUND_ERROR",
            exit_code=EXIT_NOT_FOUND,
            details={"resource": resource, "resource_id": resource_id},
        )


class DataError(AutoPVError):
    """Base for errors caused by the content of series or matrices."""

    error_code = "DATA_ERROR"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            error_code=type(self).error_code,
            exit_code=EXIT_DATA,
            details=details,
        )


class InvalidSeriesError(DataError):
    """Series is malformed, gapped or not aligned with its partner."""

    error_code = "INVALID_SERIES"


class InvalidPlantError(DataError):
    """Plant metadata violates its invariants (e.g. p_n <= 0)."""

    error_code = "INVALID_PLANT"


class DomainError(DataError):
    """Input lies outside the mathematical domain of an operation."""

    error_code = "DOMAIN_ERROR"


class DegenerateDataError(DataError):
    """Data is present but carries no usable information."""

    error_code = "DEGENERATE_DATA"


class InsufficientDataError(DataError):
    """Not enough rows or days to train."""

    error_code = "INSUFFICIENT_DATA"


class InvalidDataError(DataError):
    """Non-finite values or otherwise invalid numeric content."""

    error_code = "INVALID_DATA"


class ShapeError(DataError):
    """Matrix shape does not match the expected layout."""

    error_code = "SHAPE_ERROR"


class InvalidPoolError(DataError):
    """Ensemble pool does not satisfy its construction invariants."""

    error_code = "INVALID_POOL"


class UndefinedMetricError(DataError):
    """Metric is undefined for the given input (e.g. zero denominator)."""

    error_code = "UNDEFINED_METRIC"


class UnsupportedLatitudeError(DataError):
    """Solar geometry requested for polar latitudes."""

    error_code = "UNSUPPORTED_LATITUDE"


class SerializationError(DataError):
    """A persisted document cannot be read back."""

    error_code = "SERIALIZATION_ERROR"


class DegenerateWindowError(AutoPVError):
    """
    Weight optimisation window carries no information.

    Raised by the weight optimiser; callers keep the previous weights.

    Attributes:
        previous: The weight vector that stays in force
    """

    def __init__(self, message: str, previous: Any = None):
        super().__init__(
            message=message,
            error_code="DEGENERATE_WINDOW",
            exit_code=EXIT_DATA,
        )
        self.previous = previous


class SearchFailedError(AutoPVError):
    """
    Every CASH trial failed to fit.

    Attributes:
        causes: One entry per failed trial
    """

    def __init__(self, message: str, causes: List[Dict[str, Any]]):
        super().__init__(
            message=message,
            error_code="SEARCH_FAILED",
            exit_code=EXIT_SEARCH,
            details={"causes": causes},
        )
        self.causes = causes


# Error serialization


def serialize_error(error: Union[AutoPVError, Exception]) -> Dict[str, Any]:
    """
    Serialize an error into a dict for structured logs and reports.

    Args:
        error: Exception object

    Returns:
        Dictionary describing the error

    Examples:
        >>> err = InvalidSeriesError("step mismatch", {"steps": [900, 3600]})
        >>> result = serialize_error(err)
        >>> result["success"]
        False
        >>> result["error_code"]
        'INVALID_SERIES'
    """
    if isinstance(error, AutoPVError):
        error_response = {
            "success": False,
            "message": error.message,
            "error_code": error.error_code,
        }
        if error.details:
            error_response["details"] = error.details
        return error_response

    return {
        "success": False,
        "message": str(error),
        "error_code": "INTERNAL_ERROR",
    }


def handle_cli_error(
    error: Exception, stream: Optional[TextIO] = None
) -> int:
    """
    Print a categorized error line and return the matching exit code.

    Args:
        error: Exception raised by a command
        stream: Output stream (stderr by default)

    Returns:
        Process exit code
    """
    stream = stream or sys.stderr
    payload = serialize_error(error)
    print(f"error[{payload['error_code']}]: {payload['message']}", file=stream)

    if isinstance(error, AutoPVError):
        return error.exit_code
    return EXIT_GENERIC
