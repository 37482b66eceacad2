"""Estimator inputs: polynomial weather features, cyclic calendar encoding
and column standardisation."""

from typing import Optional, Tuple

import numpy as np

from app.core.constants import MINUTES_PER_DAY, MONTHS_PER_YEAR, STD_FLOOR
from app.models.core import FeatureMatrix, FeatureStats, TimeSeries, ensure_aligned
from app.utils.errors import DegenerateDataError, DomainError


def encode_cyclic(month, minute_of_day) -> Tuple:
    """
    Sin-cos encoding of month (1..12) and minute of day (0..1439).

    Accepts scalars or arrays.

    Returns:
        Tuple (x_s12, x_c12, x_s1440, x_c1440)

    Examples:
        >>> encode_cyclic(3, 720)[:2]  # quarter period
        (1.0, 6.123233995736766e-17)
    """
    month_arr = np.asarray(month)
    minute_arr = np.asarray(minute_of_day)
    if np.any((month_arr < 1) | (month_arr > MONTHS_PER_YEAR)):
        raise DomainError("Month must lie in 1..12")
    if np.any((minute_arr < 0) | (minute_arr >= MINUTES_PER_DAY)):
        raise DomainError("Minute of day must lie in 0..1439")

    month_angle = 2.0 * np.pi * month_arr / MONTHS_PER_YEAR
    minute_angle = 2.0 * np.pi * minute_arr / MINUTES_PER_DAY
    encoded = (
        np.sin(month_angle),
        np.cos(month_angle),
        np.sin(minute_angle),
        np.cos(minute_angle),
    )
    if month_arr.ndim == 0 and minute_arr.ndim == 0:
        return tuple(float(x) for x in encoded)
    return encoded


def build_features(g_hat: TimeSeries, t_hat: TimeSeries) -> FeatureMatrix:
    """
    Build the nine-column input matrix and the night mask.

    Columns: G^2, G, G*T, T, T^2, month sin/cos, minute sin/cos.

    Args:
        g_hat: Radiation forecast (W/m2)
        t_hat: Temperature forecast (degC)

    Returns:
        FeatureMatrix with night_mask = (g_hat <= 0)
    """
    ensure_aligned(g_hat, t_hat)

    g = g_hat.values
    t = t_hat.values
    stamps = g_hat.timestamps()
    month = stamps.month.to_numpy()
    minute = (60 * stamps.hour + stamps.minute).to_numpy()
    x_s12, x_c12, x_s1440, x_c1440 = encode_cyclic(month, minute)

    values = np.column_stack(
        [g * g, g, g * t, t, t * t, x_s12, x_c12, x_s1440, x_c1440]
    )
    return FeatureMatrix(
        values=values,
        night_mask=g <= 0,
        start=g_hat.start,
        step=g_hat.step,
    )


def fit_column_stats(values: np.ndarray) -> FeatureStats:
    """
    Column means and floored standard deviations.

    Raises:
        DegenerateDataError: If there are no rows
    """
    if values.shape[0] == 0:
        raise DegenerateDataError("Cannot standardize an empty row set")
    mean = values.mean(axis=0)
    std = np.maximum(values.std(axis=0), STD_FLOOR)
    return FeatureStats(mean=mean.tolist(), std=std.tolist())


def apply_column_stats(values: np.ndarray, stats: FeatureStats) -> np.ndarray:
    """Standardize rows with precomputed stats."""
    mean, std = stats.arrays()
    return (values - mean) / std


def standardize(
    fm: FeatureMatrix, stats: Optional[FeatureStats] = None
) -> Tuple[FeatureMatrix, FeatureStats]:
    """
    Standardize every row of a feature matrix.

    Stats, when not given, come from the daytime rows only and are returned
    for reuse at prediction time.

    Raises:
        DegenerateDataError: If stats must be fitted and no daytime row exists
    """
    if stats is None:
        stats = fit_column_stats(fm.daytime())
    scaled = FeatureMatrix(
        values=apply_column_stats(fm.values, stats),
        night_mask=fm.night_mask,
        start=fm.start,
        step=fm.step,
    )
    return scaled, stats
