"""
Per-plant forecasting pipeline.

Targets are scaled by the plant's peak rating, night rows are dropped for
training and the estimator is picked by CASH. At prediction time night
samples are forced to zero and negative outputs are clipped.
"""

import hashlib
from datetime import timedelta
from typing import Optional, Tuple

import numpy as np

from app.core.constants import CASH_VALIDATION_FRACTION, MIN_TRAINING_DAYS
from app.models.core import FeatureStats, PlantRecord, TimeSeries
from app.models.estimator import EstimatorSpec
from app.models.plant import DataProvenance, TrainedPlantModel
from app.services import regressors
from app.services.cash import run_cash
from app.services.features import build_features, standardize
from app.services.timeseries import scale_by_peak
from app.utils.config import CashConfig
from app.utils.errors import InsufficientDataError
from app.utils.logging import get_logger

logger = get_logger("plant_pipeline")


def chronological_split(
    X: np.ndarray, y: np.ndarray, validation_fraction: float = CASH_VALIDATION_FRACTION
) -> Tuple[Tuple[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]:
    """
    Split rows into training and hold-out parts, hold-out last.

    Examples:
        >>> (Xt, yt), (Xv, yv) = chronological_split(np.zeros((10, 9)), np.zeros(10))
        >>> len(yt), len(yv)
        (8, 2)
    """
    n_val = int(round(len(y) * validation_fraction))
    n_val = min(max(n_val, 1), len(y) - 1) if len(y) > 1 else 0
    cut = len(y) - n_val
    return (X[:cut], y[:cut]), (X[cut:], y[cut:])


def record_digest(rec: PlantRecord) -> str:
    """SHA-256 over the start, step and every sample of a record."""
    header = f"{rec.id}|{rec.p_n!r}|{rec.power.start.isoformat()}|{rec.power.step}"
    h = hashlib.sha256(header.encode())
    for series in (rec.power, rec.weather_forecast.g_hat, rec.weather_forecast.t_hat):
        h.update(np.ascontiguousarray(series.values, dtype=np.float64).tobytes())
    return h.hexdigest()


def trained_on(model: TrainedPlantModel, rec: PlantRecord) -> bool:
    """Whether the model was trained on exactly this record."""
    return (
        model.plant_id == rec.id
        and model.p_n == rec.p_n
        and model.provenance.start == rec.power.start
        and model.provenance.end == rec.power.end
        and model.provenance.data_digest == record_digest(rec)
    )


def training_rows(rec: PlantRecord) -> Tuple[np.ndarray, np.ndarray, FeatureStats]:
    """
    Daytime feature rows and scaled targets of a plant record.

    Returns:
        Tuple (X_day, y_day, daytime feature stats)

    Raises:
        InsufficientDataError: If there is no daytime row
    """
    fm = build_features(rec.weather_forecast.g_hat, rec.weather_forecast.t_hat)
    day = ~fm.night_mask
    if not day.any():
        raise InsufficientDataError(
            "No daytime rows to train on", details={"plant_id": rec.id}
        )
    _, stats = standardize(fm)
    target = scale_by_peak(rec.power, rec.p_n).values
    return fm.values[day], target[day], stats


def train_plant_model(
    rec: PlantRecord,
    seed: int = 0,
    cash: Optional[CashConfig] = None,
    spec: Optional[EstimatorSpec] = None,
    min_days: float = MIN_TRAINING_DAYS,
) -> TrainedPlantModel:
    """
    Train the pipeline of one plant.

    Args:
        rec: Plant record with aligned power and weather series
        seed: CASH seed
        cash: Search settings (defaults when None)
        spec: Fit this spec on all daytime rows instead of searching
        min_days: Minimum covered period in days

    Returns:
        TrainedPlantModel

    Raises:
        InsufficientDataError: Too short a record or too few daytime rows
        SearchFailedError: If every CASH trial failed
    """
    covered = len(rec.power) * rec.power.step
    if covered < timedelta(days=min_days):
        raise InsufficientDataError(
            f"At least {min_days} days of data are required",
            details={"plant_id": rec.id, "days": covered.total_seconds() / 86400},
        )

    X, y, stats = training_rows(rec)
    state = None
    if spec is not None:
        estimator = regressors.fit(spec, X, y)
    else:
        cash = cash or CashConfig()
        train, val = chronological_split(X, y, cash.validation_fraction)
        estimator, state = run_cash(
            train,
            val,
            seed=seed,
            max_trials=cash.max_trials,
            kinds=cash.kinds,
            top_k=cash.top_k,
            std_threshold=cash.std_threshold,
            patience=cash.patience,
        )

    logger.info(
        "Plant model trained",
        plant_id=rec.id,
        rows=int(len(y)),
        spec=estimator.spec.label(),
    )
    return TrainedPlantModel(
        plant_id=rec.id,
        p_n=rec.p_n,
        estimator=estimator,
        feature_stats=stats,
        provenance=DataProvenance(
            start=rec.power.start, end=rec.power.end, data_digest=record_digest(rec)
        ),
        search=state,
    )


def predict_scaled(
    m: TrainedPlantModel, g_hat: TimeSeries, t_hat: TimeSeries
) -> TimeSeries:
    """
    Scaled power forecast: the clipped estimator output by day, exactly 0
    wherever the radiation forecast is not positive.

    Raises:
        InvalidSeriesError: If the weather series are not aligned
    """
    fm = build_features(g_hat, t_hat)
    out = np.zeros(len(fm))
    day = ~fm.night_mask
    if day.any():
        out[day] = np.maximum(regressors.predict(m.estimator, fm.values[day]), 0.0)
    return g_hat.with_values(out)
