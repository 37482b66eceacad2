"""Tests for date utilities."""

import unittest
from datetime import datetime, timedelta, timezone

import pandas as pd

from app.utils.date import calendar_fields, ensure_utc, hours, samples_per_day
from app.utils.errors import InvalidSeriesError


class TestDateUtils(unittest.TestCase):
    """Test cases for date utils."""

    def test_ensure_utc(self):
        """Test ensure_utc function."""
        expected = datetime(2020, 3, 15, 12, 0, tzinfo=timezone.utc)

        self.assertEqual(ensure_utc("2020-03-15T12:00"), expected)
        self.assertEqual(ensure_utc(datetime(2020, 3, 15, 12, 0)), expected)
        self.assertEqual(ensure_utc(pd.Timestamp("2020-03-15T13:00+01:00")), expected)
        self.assertIs(ensure_utc("2020-03-15").tzinfo, timezone.utc)

        with self.assertRaises(InvalidSeriesError):
            ensure_utc("not a date")

    def test_calendar_fields(self):
        """Test calendar_fields function."""
        self.assertEqual(calendar_fields("2020-03-15T12:00"), (3, 720))
        self.assertEqual(calendar_fields("2020-01-01T00:00"), (1, 0))
        self.assertEqual(calendar_fields("2020-12-31T23:45"), (12, 1425))

    def test_calendar_fields_uses_utc(self):
        """Test that aware timestamps are converted before reading fields."""
        self.assertEqual(calendar_fields("2021-01-01T00:30+01:00"), (12, 1410))

    def test_hours(self):
        """Test hours function."""
        self.assertEqual(hours(timedelta(minutes=15)), 0.25)
        self.assertEqual(hours(timedelta(hours=1)), 1.0)

    def test_samples_per_day(self):
        """Test samples_per_day function."""
        self.assertEqual(samples_per_day(timedelta(minutes=15)), 96)
        self.assertEqual(samples_per_day(timedelta(hours=1)), 24)

        with self.assertRaises(InvalidSeriesError):
            samples_per_day(timedelta(minutes=7))


if __name__ == "__main__":
    unittest.main()
