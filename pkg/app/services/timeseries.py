"""Unit transforms on time series: energy to power and peak-power scaling."""

import numpy as np

from app.models.core import TimeSeries
from app.utils.date import calendar_fields, hours
from app.utils.errors import InvalidPlantError, InvalidSeriesError

__all__ = [
    "calendar_fields",
    "energy_to_mean_power",
    "rescale_by_peak",
    "scale_by_peak",
]


def energy_to_mean_power(e: TimeSeries) -> TimeSeries:
    """
    Convert per-interval energy (kWh) into mean power (kW).

    Args:
        e: Energy generated in each sampling interval

    Returns:
        Mean power series on the same grid

    Examples:
        >>> from datetime import datetime, timezone
        >>> e = TimeSeries(
        ...     start=datetime(2020, 6, 1, tzinfo=timezone.utc), values=np.array([0.25, 0.5])
        ... )
        >>> energy_to_mean_power(e).values.tolist()
        [1.0, 2.0]
    """
    if np.any(e.values < 0):
        raise InvalidSeriesError(
            "Energy values must be non-negative",
            details={"min": float(np.min(e.values))},
        )
    return e.with_values(e.values / hours(e.step))


def _check_peak(p_n: float) -> None:
    if not p_n > 0:
        raise InvalidPlantError(
            "Peak power rating must be positive", details={"p_n": p_n}
        )


def scale_by_peak(y: TimeSeries, p_n: float) -> TimeSeries:
    """
    Divide a power series by the plant's peak power rating.

    Values above 1 are legal and left untouched.
    """
    _check_peak(p_n)
    return y.with_values(y.values / p_n)


def rescale_by_peak(y_scaled: TimeSeries, p_n_new: float) -> TimeSeries:
    """Inverse of :func:`scale_by_peak` for the target plant's rating."""
    _check_peak(p_n_new)
    return y_scaled.with_values(y_scaled.values * p_n_new)
