from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from app.models.core import MountingConfig, PlantRecord, TimeSeries, WeatherForecast
from app.services.timeseries import energy_to_mean_power
from app.utils.errors import InvalidSeriesError, NotFoundError
from app.utils.logging import get_logger

logger = get_logger("csv")

POWER_COLUMNS = ["timestamp", "power_kw"]
WEATHER_COLUMNS = ["timestamp", "ghat_wm2", "that_c"]
PLANT_COLUMNS = ["timestamp", "power_kw", "ghat_wm2", "that_c"]


def _read_frame(path: Path) -> pd.DataFrame:
    if not path.exists():
        raise NotFoundError("CSV file", str(path))
    frame = pd.read_csv(path, float_precision="round_trip")
    if "timestamp" not in frame.columns:
        raise InvalidSeriesError(
            "CSV file has no timestamp column", details={"path": str(path)}
        )
    frame["timestamp"] = pd.to_datetime(frame["timestamp"], utc=True)
    return frame


def _series(frame: pd.DataFrame, column: str, path: Path) -> TimeSeries:
    """
    Series of one column on a gap-free grid.

    Raises:
        InvalidSeriesError: Missing column, gaps, irregular spacing or NaNs
    """
    if column not in frame.columns:
        raise InvalidSeriesError(
            f"CSV file has no {column} column", details={"path": str(path)}
        )
    stamps = pd.DatetimeIndex(frame["timestamp"])
    if len(stamps) < 2:
        raise InvalidSeriesError("Series needs at least two samples", details={"path": str(path)})
    deltas = np.diff(stamps.asi8)
    if np.any(deltas != deltas[0]) or deltas[0] <= 0:
        raise InvalidSeriesError(
            "Timestamps are not uniformly spaced", details={"path": str(path)}
        )
    values = frame[column].to_numpy(dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise InvalidSeriesError(
            f"Column {column} has missing values", details={"path": str(path)}
        )
    return TimeSeries(
        start=stamps[0].to_pydatetime(),
        step=pd.Timedelta(int(deltas[0]), unit="ns").to_pytimedelta(),
        values=values,
    )


def read_plant_csv(
    path: Union[str, Path],
    plant_id: str,
    p_n: float,
    weather_path: Optional[Union[str, Path]] = None,
    mounting: Optional[MountingConfig] = None,
) -> PlantRecord:
    """
    Read a plant from one combined CSV or a power/weather pair.

    The power file holds ``power_kw`` or, alternatively, ``energy_kwh`` per
    interval, which is converted to mean power.

    Args:
        path: Combined file, or the power file when weather_path is given
        plant_id: Plant identifier
        p_n: Peak rating in kW
        weather_path: Separate ``timestamp,ghat_wm2,that_c`` file
        mounting: Known mounting, if any

    Returns:
        PlantRecord

    Raises:
        NotFoundError: Missing file
        InvalidSeriesError: Malformed, gapped or misaligned series
    """
    path = Path(path)
    power_frame = _read_frame(path)
    weather_frame = _read_frame(Path(weather_path)) if weather_path else power_frame

    if "power_kw" in power_frame.columns:
        power = _series(power_frame, "power_kw", path)
    else:
        power = energy_to_mean_power(_series(power_frame, "energy_kwh", path))

    forecast = WeatherForecast(
        g_hat=_series(weather_frame, "ghat_wm2", Path(weather_path or path)),
        t_hat=_series(weather_frame, "that_c", Path(weather_path or path)),
    )
    logger.debug("Plant CSV read", plant_id=plant_id, rows=len(power))
    return PlantRecord(
        id=plant_id,
        p_n=p_n,
        mounting=mounting,
        power=power,
        weather_forecast=forecast,
    )


def plant_frame(rec: PlantRecord) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "timestamp": rec.power.timestamps().strftime("%Y-%m-%dT%H:%M:%SZ"),
            "power_kw": rec.power.values,
            "ghat_wm2": rec.weather_forecast.g_hat.values,
            "that_c": rec.weather_forecast.t_hat.values,
        },
        columns=PLANT_COLUMNS,
    )


def write_plant_csv(rec: PlantRecord, path: Union[str, Path]) -> Path:
    """Write the combined ``timestamp,power_kw,ghat_wm2,that_c`` file."""
    return write_frame_csv(plant_frame(rec), path)


def write_frame_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """Write a frame without index; floats keep full precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path


def records_frame(data: List[Union[BaseModel, Dict[str, Any]]]) -> pd.DataFrame:
    """
    Frame of a homogeneous list of models or dicts; nested dicts are
    flattened into dotted column names.
    """
    rows = [item.model_dump(mode="json") if isinstance(item, BaseModel) else item for item in data]
    return pd.json_normalize(rows) if rows else pd.DataFrame()
