from datetime import datetime, timedelta
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.constants import DEFAULT_STEP, N_FEATURES
from app.utils.date import ensure_utc
from app.utils.errors import InvalidPlantError, InvalidSeriesError, ShapeError


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


class TimeSeries(BaseModel):
    """
    Uniformly sampled, UTC-indexed scalar series.

    Sample k has timestamp ``start + k * step``; there are no gaps. The
    value array is read-only, so instances can be shared freely.

    Attributes:
        start: Timestamp of the first sample (UTC)
        step: Sampling period
        values: Sample values (kW, kWh, W/m2 or degC depending on context)
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    start: datetime
    step: timedelta = DEFAULT_STEP
    values: np.ndarray

    @field_validator("start", mode="before")
    def start_in_utc(cls, v):
        return ensure_utc(v)

    @field_validator("step")
    def step_positive(cls, v: timedelta) -> timedelta:
        if v.total_seconds() <= 0:
            raise InvalidSeriesError(
                "Series step must be positive",
                details={"step_seconds": v.total_seconds()},
            )
        return v

    @field_validator("values", mode="before")
    def values_as_array(cls, v) -> np.ndarray:
        array = _frozen_array(v)
        if array.ndim != 1:
            raise InvalidSeriesError(
                "Series values must be one-dimensional",
                details={"shape": list(array.shape)},
            )
        return array

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def end(self) -> datetime:
        """Timestamp one step after the last sample."""
        return self.start + len(self) * self.step

    def timestamps(self) -> pd.DatetimeIndex:
        """Timestamps of all samples."""
        return pd.date_range(
            start=self.start, periods=len(self), freq=self.step
        )

    def index_of(self, ts: datetime) -> int:
        """
        Sample index of a timestamp on the series grid.

        Raises:
            InvalidSeriesError: If ts is not on the grid
        """
        offset = ensure_utc(ts) - self.start
        k, rem = divmod(offset, self.step)
        if rem:
            raise InvalidSeriesError(
                "Timestamp is not on the series grid",
                details={"timestamp": ensure_utc(ts).isoformat()},
            )
        return int(k)

    def slice(self, begin: int, end: Optional[int] = None) -> "TimeSeries":
        """Sub-series ``[begin, end)`` by sample index."""
        n = len(self)
        begin = max(0, min(begin, n))
        end = n if end is None else max(begin, min(end, n))
        return TimeSeries(
            start=self.start + begin * self.step,
            step=self.step,
            values=self.values[begin:end],
        )

    def between(self, start: datetime, end: datetime) -> "TimeSeries":
        """Sub-series covering ``[start, end)``."""
        return self.slice(self.index_of(start), self.index_of(end))

    def with_values(self, values) -> "TimeSeries":
        """Series on the same grid with new values."""
        array = np.asarray(values, dtype=np.float64)
        if array.shape != self.values.shape:
            raise InvalidSeriesError(
                "Replacement values must keep the series length",
                details={"expected": len(self), "got": int(array.size)},
            )
        return TimeSeries(start=self.start, step=self.step, values=array)

    def to_pandas(self) -> pd.Series:
        """Values as a timestamp-indexed pandas Series."""
        return pd.Series(self.values, index=self.timestamps())


def ensure_aligned(*series: TimeSeries) -> None:
    """
    Check that all series share start, step and length.

    Raises:
        InvalidSeriesError: On any mismatch; series are never truncated
    """
    if not series:
        return
    first = series[0]
    for other in series[1:]:
        if other.step != first.step:
            raise InvalidSeriesError(
                "Series steps differ",
                details={
                    "steps": [
                        first.step.total_seconds(),
                        other.step.total_seconds(),
                    ]
                },
            )
        if len(other) != len(first) or other.start != first.start:
            raise InvalidSeriesError(
                "Series are not aligned",
                details={
                    "starts": [first.start.isoformat(), other.start.isoformat()],
                    "lengths": [len(first), len(other)],
                },
            )


class MountingConfig(BaseModel):
    """
    Panel mounting of one roof section.

    Attributes:
        inclination: Tilt from horizontal in degrees
        azimuth: Compass orientation in degrees, 180 = south
    """

    model_config = ConfigDict(frozen=True)

    inclination: float = Field(..., ge=0.0, le=90.0)
    azimuth: float = Field(..., ge=0.0, lt=360.0)


class WeatherForecast(BaseModel):
    """
    Day-ahead weather forecast of a plant location.

    Attributes:
        g_hat: Global radiation forecast (W/m2)
        t_hat: Air temperature forecast (degC)
    """

    model_config = ConfigDict(frozen=True)

    g_hat: TimeSeries
    t_hat: TimeSeries

    @model_validator(mode="after")
    def series_aligned(self) -> "WeatherForecast":
        ensure_aligned(self.g_hat, self.t_hat)
        return self

    def slice(self, begin: int, end: Optional[int] = None) -> "WeatherForecast":
        return WeatherForecast(
            g_hat=self.g_hat.slice(begin, end),
            t_hat=self.t_hat.slice(begin, end),
        )


class PlantRecord(BaseModel):
    """
    A PV plant: metadata plus measurement and weather forecast series.

    Attributes:
        id: Plant identifier
        p_n: Peak power rating in kW
        mounting: Ground-truth mounting (synthetic plants only)
        power: Mean power measurement in kW
        weather_forecast: Aligned radiation and temperature forecasts
    """

    model_config = ConfigDict(frozen=True)

    id: str
    p_n: float
    mounting: Optional[MountingConfig] = None
    power: TimeSeries
    weather_forecast: WeatherForecast

    @field_validator("p_n")
    def p_n_positive(cls, v: float) -> float:
        if not v > 0:
            raise InvalidPlantError(
                "Peak power rating must be positive", details={"p_n": v}
            )
        return v

    @model_validator(mode="after")
    def series_aligned(self) -> "PlantRecord":
        ensure_aligned(self.power, self.weather_forecast.g_hat)
        return self

    def slice(self, begin: int, end: Optional[int] = None) -> "PlantRecord":
        """Record restricted to samples ``[begin, end)``."""
        return self.model_copy(
            update={
                "power": self.power.slice(begin, end),
                "weather_forecast": self.weather_forecast.slice(begin, end),
            }
        )

    def between(self, start: datetime, end: datetime) -> "PlantRecord":
        """Record restricted to ``[start, end)``."""
        return self.slice(self.power.index_of(start), self.power.index_of(end))


class FeatureStats(BaseModel):
    """Per-column mean and (floored) standard deviation."""

    model_config = ConfigDict(frozen=True)

    mean: List[float]
    std: List[float]

    @model_validator(mode="after")
    def column_count(self) -> "FeatureStats":
        if len(self.mean) != len(self.std):
            raise ShapeError("Mean and std lengths differ")
        return self

    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.mean), np.asarray(self.std)


class FeatureMatrix(BaseModel):
    """
    Row-per-sample estimator inputs with the night mask attached.

    Attributes:
        values: Array of shape (n, 9) in the canonical column order
        night_mask: True where the radiation forecast is <= 0
        start: Timestamp of row 0
        step: Row spacing
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    night_mask: np.ndarray
    start: datetime
    step: timedelta = DEFAULT_STEP

    @field_validator("values", mode="before")
    def values_as_matrix(cls, v) -> np.ndarray:
        array = _frozen_array(v)
        if array.ndim != 2 or array.shape[1] != N_FEATURES:
            raise ShapeError(
                f"Feature matrix must have {N_FEATURES} columns",
                details={"shape": list(array.shape)},
            )
        return array

    @field_validator("night_mask", mode="before")
    def mask_as_bool(cls, v) -> np.ndarray:
        return _frozen_array(v, dtype=bool)

    @model_validator(mode="after")
    def mask_length(self) -> "FeatureMatrix":
        if self.night_mask.shape != (self.values.shape[0],):
            raise ShapeError("Night mask length differs from row count")
        return self

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def daytime(self) -> np.ndarray:
        """Rows where the radiation forecast is positive."""
        return self.values[~self.night_mask]
