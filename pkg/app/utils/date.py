"""Date handling utilities for the AutoPV toolkit."""

from datetime import datetime, timedelta, timezone
from typing import Tuple, Union

import pandas as pd

from app.utils.errors import InvalidSeriesError


def ensure_utc(ts: Union[datetime, pd.Timestamp, str]) -> datetime:
    """
    Normalise a timestamp to a timezone-aware UTC datetime.

    Naive inputs are interpreted as UTC.

    Args:
        ts: Datetime, pandas Timestamp or ISO-8601 string

    Returns:
        Aware datetime in UTC

    Examples:
        >>> ensure_utc("2020-03-15T12:00")
        datetime.datetime(2020, 3, 15, 12, 0, tzinfo=datetime.timezone.utc)
    """
    try:
        stamp = pd.Timestamp(ts)
    except (ValueError, TypeError) as e:
        raise InvalidSeriesError(f"Cannot parse timestamp: {ts}") from e

    if stamp.tzinfo is None:
        stamp = stamp.tz_localize("UTC")
    else:
        stamp = stamp.tz_convert("UTC")
    return stamp.to_pydatetime().replace(tzinfo=timezone.utc)


def calendar_fields(ts: Union[datetime, pd.Timestamp, str]) -> Tuple[int, int]:
    """
    Month (1..12) and minute of day (0..1439) of a timestamp in UTC.

    Args:
        ts: Timestamp

    Returns:
        Tuple (month, minute_of_day)

    Examples:
        >>> calendar_fields("2020-03-15T12:00")
        (3, 720)
        >>> calendar_fields("2020-12-31T23:45")
        (12, 1425)
    """
    stamp = ensure_utc(ts)
    return stamp.month, 60 * stamp.hour + stamp.minute


def hours(step: timedelta) -> float:
    """Length of a sampling step in hours."""
    return step.total_seconds() / 3600.0


def samples_per_day(step: timedelta) -> int:
    """
    Number of samples in one day for a step that divides the day evenly.

    Raises:
        InvalidSeriesError: If the step does not divide 24 h
    """
    seconds = step.total_seconds()
    if seconds <= 0 or 86400 % seconds:
        raise InvalidSeriesError(
            "Step must divide the day evenly",
            details={"step_seconds": seconds},
        )
    return int(86400 // seconds)
