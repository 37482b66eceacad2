"""Tests for formatting utilities."""

import unittest

from app.utils.formatting import format_float, format_percent, format_table, format_weights


class TestFormattingUtils(unittest.TestCase):
    """Test cases for formatting utils."""

    def test_format_float(self):
        """Test format_float function."""
        self.assertEqual(format_float(0.32349), "0.323")
        self.assertEqual(format_float(1, decimal_places=2), "1.00")
        self.assertEqual(format_float(None), "-")

    def test_format_percent(self):
        """Test format_percent function."""
        self.assertEqual(format_percent(0.1234), "+12.3%")
        self.assertEqual(format_percent(-0.05, decimal_places=0), "-5%")
        self.assertEqual(format_percent(0.0), "+0.0%")

    def test_format_weights(self):
        """Test format_weights function."""
        self.assertEqual(format_weights(["a", "b"], [0.25, 0.75]), "a=0.250 b=0.750")
        self.assertEqual(format_weights([], []), "")

    def test_format_table(self):
        """Test format_table alignment."""
        table = format_table(
            ["Plant", "IM-HDA", "AutoPV"],
            [["plant_01", "0.310", "0.325"], ["Mean", "0.3", "1.000"]],
        )
        lines = table.split("\n")

        self.assertEqual(lines[0], "Plant     IM-HDA  AutoPV")
        self.assertEqual(lines[1], "--------  ------  ------")
        self.assertEqual(lines[2], "plant_01   0.310   0.325")
        self.assertEqual(lines[3], "Mean         0.3   1.000")

    def test_format_table_header_only(self):
        """Test a table without rows."""
        self.assertEqual(format_table(["Plant", "nMAE"], []), "Plant  nMAE\n-----  ----")


if __name__ == "__main__":
    unittest.main()
