"""Tests for error handling utilities."""

import io
import unittest

from app.utils.errors import (
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_GENERIC,
    EXIT_NOT_FOUND,
    EXIT_SEARCH,
    AutoPVError,
    ConfigError,
    DataError,
    DegenerateWindowError,
    InsufficientDataError,
    InvalidSeriesError,
    NotFoundError,
    SearchFailedError,
    UndefinedMetricError,
    handle_cli_error,
    serialize_error,
)


class TestErrorUtils(unittest.TestCase):
    """Test cases for error handling utils."""

    def test_autopv_error_base(self):
        """Test AutoPVError base class."""
        error = AutoPVError(message="Test error")

        self.assertEqual(error.message, "Test error")
        self.assertEqual(error.exit_code, EXIT_GENERIC)
        self.assertEqual(error.error_code, "AUTOPV_ERROR")
        self.assertEqual(error.details, {})

    def test_config_error(self):
        """Test ConfigError class."""
        details = {"errors": [{"loc": ["cash", "max_trials"]}]}
        error = ConfigError("Invalid configuration", details=details)

        self.assertEqual(error.exit_code, EXIT_CONFIG)
        self.assertEqual(error.error_code, "CONFIG_ERROR")
        self.assertEqual(error.details, details)

    def test_not_found_error(self):
        """Test NotFoundError class."""
        error = NotFoundError("Model bundle", "plant_03")

        self.assertEqual(error.message, "Model bundle plant_03 not found")
        self.assertEqual(error.exit_code, EXIT_NOT_FOUND)
        self.assertEqual(error.details["resource_id"], "plant_03")
        self.assertEqual(NotFoundError("Fleet manifest").message, "Fleet manifest not found")

    def test_data_errors_share_exit_code(self):
        """Test that every data error carries its own code and the data exit code."""
        for cls, code in [
            (InvalidSeriesError, "INVALID_SERIES"),
            (InsufficientDataError, "INSUFFICIENT_DATA"),
            (UndefinedMetricError, "UNDEFINED_METRIC"),
        ]:
            error = cls("bad data")
            self.assertIsInstance(error, DataError)
            self.assertEqual(error.error_code, code)
            self.assertEqual(error.exit_code, EXIT_DATA)

    def test_degenerate_window_keeps_previous(self):
        """Test that the previous weights travel with the signal."""
        error = DegenerateWindowError("all zero", previous=[0.5, 0.5])
        self.assertEqual(error.previous, [0.5, 0.5])
        self.assertEqual(error.error_code, "DEGENERATE_WINDOW")

    def test_search_failed_error(self):
        """Test SearchFailedError causes."""
        causes = [{"error_code": "INVALID_DATA"}]
        error = SearchFailedError("Every CASH trial failed", causes)

        self.assertEqual(error.exit_code, EXIT_SEARCH)
        self.assertEqual(error.causes, causes)
        self.assertEqual(error.details["causes"], causes)

    def test_serialize_error(self):
        """Test serialize_error function."""
        error = InvalidSeriesError("step mismatch", details={"steps": [900, 3600]})
        result = serialize_error(error)

        self.assertEqual(result["success"], False)
        self.assertEqual(result["message"], "step mismatch")
        self.assertEqual(result["error_code"], "INVALID_SERIES")
        self.assertEqual(result["details"], {"steps": [900, 3600]})

        # Without details
        self.assertNotIn("details", serialize_error(InvalidSeriesError("gap")))

        # Standard exception
        result = serialize_error(ValueError("Standard error"))
        self.assertEqual(result["message"], "Standard error")
        self.assertEqual(result["error_code"], "INTERNAL_ERROR")

    def test_handle_cli_error(self):
        """Test the printed line and returned exit code."""
        stream = io.StringIO()
        code = handle_cli_error(NotFoundError("Plant", "plant_99"), stream)

        self.assertEqual(code, EXIT_NOT_FOUND)
        self.assertEqual(stream.getvalue(), "error[NOT_FOUND_ERROR]: Plant plant_99 not found\n")

    def test_handle_cli_error_unexpected(self):
        """Test that foreign exceptions map to the generic exit code."""
        stream = io.StringIO()
        code = handle_cli_error(RuntimeError("boom"), stream)

        self.assertEqual(code, EXIT_GENERIC)
        self.assertIn("error[INTERNAL_ERROR]: boom", stream.getvalue())


if __name__ == "__main__":
    unittest.main()
