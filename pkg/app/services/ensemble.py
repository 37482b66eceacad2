"""
Weighted ensemble of pretrained plant models for a new plant.

Weights start equal (cold start). Every adaptation cycle they are re-fitted by
bounded least squares on the most recent window of scaled measurements and
then normalized to sum to one. The combined scaled forecast is re-scaled by
the new plant's peak rating.
"""

import json
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from scipy.optimize import lsq_linear

from app.core.constants import (
    DEFAULT_CYCLE_DAYS,
    DEFAULT_WINDOW_SAMPLES,
    DEGENERATE_WEIGHT_SUM,
    WEIGHT_TIKHONOV,
)
from app.models.core import TimeSeries, ensure_aligned
from app.models.ensemble import (
    AdaptationStatus,
    EnsembleState,
    WeightLogEntry,
    WeightVector,
)
from app.models.plant import TrainedPlantModel
from app.services.plant_pipeline import predict_scaled
from app.services.timeseries import rescale_by_peak, scale_by_peak
from app.utils.errors import DegenerateWindowError, InvalidPoolError, InvalidSeriesError
from app.utils.logging import get_logger

logger = get_logger("ensemble")

ForecastHistory = Union[np.ndarray, Sequence[TimeSeries]]


def init_equal(
    pool: List[TrainedPlantModel],
    p_n_new: float,
    cycle_days: int = DEFAULT_CYCLE_DAYS,
    window_samples: int = DEFAULT_WINDOW_SAMPLES,
) -> EnsembleState:
    """
    Cold-start ensemble: every pool model weighted 1/N.

    Raises:
        InvalidPoolError: Fewer than two models, or a window shorter than the pool
        InvalidPlantError: p_n_new <= 0
    """
    if len(pool) < 2:
        raise InvalidPoolError(
            "Ensemble pool needs at least two models", details={"pool": len(pool)}
        )
    return EnsembleState(
        pool=list(pool),
        weights=WeightVector.equal(len(pool)),
        p_n_new=p_n_new,
        cycle_days=cycle_days,
        window_samples=window_samples,
    )


def pool_forecast_matrix(
    pool: Sequence[TrainedPlantModel], g_hat: TimeSeries, t_hat: TimeSeries
) -> np.ndarray:
    """Scaled forecasts of every pool model as columns of an (n, N) array."""
    return np.column_stack([predict_scaled(m, g_hat, t_hat).values for m in pool])


def combine(forecasts: np.ndarray, weights: WeightVector) -> np.ndarray:
    """Weighted sum of scaled pool forecasts per row."""
    return forecasts @ weights.array()


def ensemble_predict(
    st: EnsembleState, g_hat: TimeSeries, t_hat: TimeSeries
) -> TimeSeries:
    """
    Forecast of the new plant in kW.

    Raises:
        InvalidSeriesError: If the weather series are not aligned
    """
    scaled = combine(pool_forecast_matrix(st.pool, g_hat, t_hat), st.weights)
    return rescale_by_peak(g_hat.with_values(scaled), st.p_n_new)


def windowed_mse(forecasts: np.ndarray, target: np.ndarray, w: np.ndarray) -> float:
    """Mean squared error of the weighted forecast over a window."""
    residual = forecasts @ w - target
    return float(np.mean(residual**2))


def bounded_lsq_weights(forecasts: np.ndarray, target: np.ndarray) -> np.ndarray:
    """
    Box-constrained least-squares weights before normalization.

    Minimizes ``||F w - y||^2 + WEIGHT_TIKHONOV * ||w||^2`` with every weight in
    [0, 1]. Rows that are zero in both F and y leave the solution unchanged.
    """
    n_models = forecasts.shape[1]
    A = np.vstack([forecasts, np.sqrt(WEIGHT_TIKHONOV) * np.eye(n_models)])
    b = np.concatenate([target, np.zeros(n_models)])
    result = lsq_linear(A, b, bounds=(0.0, 1.0), method="bvls")
    return np.clip(result.x, 0.0, 1.0)


def _as_matrix(history: ForecastHistory) -> np.ndarray:
    if isinstance(history, np.ndarray):
        return history if history.ndim == 2 else history[:, None]
    return np.column_stack([s.values for s in history])


def optimize_weights(
    pool_forecasts: ForecastHistory,
    target: Union[np.ndarray, TimeSeries],
    prev: WeightVector,
) -> WeightVector:
    """
    Fit ensemble weights on one window.

    Args:
        pool_forecasts: Scaled forecast of every pool model over the window
        target: Scaled measurement of the new plant over the window
        prev: Weights in force before this window

    Returns:
        Normalized weights

    Raises:
        DegenerateWindowError: All forecasts are zero, or the bounded solution
            is (numerically) zero; ``previous`` carries ``prev``
        InvalidSeriesError: Window lengths differ
    """
    F = _as_matrix(pool_forecasts)
    y = target.values if isinstance(target, TimeSeries) else np.asarray(target, float)
    if F.shape[0] != y.shape[0] or F.shape[1] != len(prev):
        raise InvalidSeriesError(
            "Forecast window does not match target or pool",
            details={"forecasts": list(F.shape), "target": int(y.shape[0])},
        )
    if not np.any(F):
        raise DegenerateWindowError("Every pool forecast is zero over the window", previous=prev)

    w = bounded_lsq_weights(F, y)
    total = float(w.sum())
    if total < DEGENERATE_WEIGHT_SUM:
        raise DegenerateWindowError("Bounded weights are all zero", previous=prev)
    return WeightVector(w=(w / total).tolist())


def adaptation_step(
    st: EnsembleState,
    new_measurements: TimeSeries,
    pool_forecast_history: ForecastHistory,
) -> EnsembleState:
    """
    Re-fit the weights on the most recent ``window_samples`` samples.

    The measurements (kW) are scaled by ``p_n_new``. With fewer samples than
    the window the state comes back unchanged with status ``NOT_YET``; a
    degenerate window keeps the weights and reports ``DEGENERATE``.

    Args:
        st: Current ensemble state
        new_measurements: Measured power of the new plant so far
        pool_forecast_history: Scaled pool forecasts on the same grid

    Returns:
        New EnsembleState

    Raises:
        InvalidSeriesError: If forecasts and measurements are not aligned
    """
    if not isinstance(pool_forecast_history, np.ndarray):
        ensure_aligned(new_measurements, *pool_forecast_history)
    F = _as_matrix(pool_forecast_history)
    if F.shape[0] != len(new_measurements):
        raise InvalidSeriesError(
            "Pool forecast history is not aligned with the measurements",
            details={"forecasts": int(F.shape[0]), "measurements": len(new_measurements)},
        )

    K = st.window_samples
    n = len(new_measurements)
    if n < K:
        logger.debug("Adaptation skipped, window not yet full", samples=n, window=K)
        return st.model_copy(update={"last_status": AdaptationStatus.NOT_YET})

    window = new_measurements.slice(n - K, n)
    target = scale_by_peak(window, st.p_n_new).values
    F = F[n - K :]
    try:
        weights = optimize_weights(F, target, st.weights)
    except DegenerateWindowError as e:
        logger.warning(
            "Degenerate adaptation window, weights kept",
            reason=e.message,
            end=window.end.isoformat(),
        )
        return st.model_copy(
            update={
                "last_status": AdaptationStatus.DEGENERATE,
                "last_window_mse": windowed_mse(F, target, st.weights.array()),
            }
        )

    mse = windowed_mse(F, target, weights.array())
    logger.info(
        "Ensemble weights adapted",
        end=window.end.isoformat(),
        weights=[round(w, 6) for w in weights.w],
        window_mse=mse,
    )
    return st.model_copy(
        update={
            "weights": weights,
            "last_adaptation": window.end,
            "last_status": AdaptationStatus.ADAPTED,
            "last_window_mse": mse,
        }
    )


def extend_pool(
    st: EnsembleState, model: TrainedPlantModel, weight: Optional[float] = None
) -> EnsembleState:
    """
    Append a model (typically the new plant's own) to the pool.

    The new model gets ``weight`` (1/(N+1) by default) and the existing
    weights are scaled by ``1 - weight``.

    Raises:
        InvalidPoolError: If weight is outside [0, 1] or the window gets too short
    """
    n = len(st.pool)
    weight = 1.0 / (n + 1) if weight is None else weight
    if not 0.0 <= weight <= 1.0:
        raise InvalidPoolError("New model weight must lie in [0, 1]", details={"weight": weight})
    scaled = st.weights.array() * (1.0 - weight)
    w = np.append(scaled, weight)
    return EnsembleState(
        pool=[*st.pool, model],
        weights=WeightVector(w=(w / w.sum()).tolist()),
        p_n_new=st.p_n_new,
        cycle_days=st.cycle_days,
        window_samples=st.window_samples,
        last_adaptation=st.last_adaptation,
        last_status=AdaptationStatus.EXTENDED,
        last_window_mse=None,
    )


def _first_max(values: np.ndarray) -> int:
    """Index of the first value equal to the maximum up to float rounding."""
    finite = np.isfinite(values)
    top = values[finite].max()
    return int(np.flatnonzero(finite & np.isclose(values, top))[0])


def select_diverse_pool(scaled_forecasts: Dict[str, np.ndarray], size: int) -> List[str]:
    """
    Greedy max-min selection of mutually distant forecast curves.

    Starts from the curve farthest (RMS) from the candidate mean, then keeps
    adding the candidate whose nearest selected curve is farthest. Ties go to
    the earlier candidate.

    Args:
        scaled_forecasts: Candidate id to scaled forecast curve (same length)
        size: Number of models to keep

    Returns:
        Selected ids in selection order

    Raises:
        InvalidPoolError: If size < 2 or exceeds the candidate count
    """
    ids = list(scaled_forecasts)
    if not 2 <= size <= len(ids):
        raise InvalidPoolError(
            "Pool size must be between 2 and the candidate count",
            details={"size": size, "candidates": len(ids)},
        )
    curves = np.vstack([np.asarray(scaled_forecasts[i], dtype=np.float64) for i in ids])

    def rms(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.sqrt(np.mean((a - b) ** 2, axis=-1))

    selected = [_first_max(rms(curves, curves.mean(axis=0)))]
    nearest = rms(curves, curves[selected[0]])
    while len(selected) < size:
        candidates = nearest.copy()
        candidates[selected] = -np.inf
        pick = _first_max(candidates)
        selected.append(pick)
        nearest = np.minimum(nearest, rms(curves, curves[pick]))
    return [ids[i] for i in selected]


def weight_log_entry(st: EnsembleState, timestamp: datetime) -> WeightLogEntry:
    return WeightLogEntry(
        timestamp=timestamp,
        status=st.last_status,
        pool_ids=st.pool_ids,
        weights=list(st.weights.w),
        window_mse=st.last_window_mse,
    )


def append_weight_log(path: Union[str, Path], entry: WeightLogEntry) -> None:
    """Append one entry to the weight history, one JSON line per entry."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a") as f:
        f.write(json.dumps(entry.model_dump(mode="json"), sort_keys=True))
        f.write("\n")


def read_weight_log(path: Union[str, Path]) -> List[WeightLogEntry]:
    with open(path, "r") as f:
        return [WeightLogEntry.model_validate_json(line) for line in f if line.strip()]
