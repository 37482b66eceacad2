"""
Day-ahead replay of the test period of one plant.

Every day is forecast with the weights (or model) fixed before that day
starts. Adaptation happens at the start of day d = C, 2C, ... and only sees
measurements from the days before it; a final adaptation fires when the
test period ends on a cycle boundary.
"""

from datetime import datetime
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from app.core.constants import DEFAULT_CYCLE_DAYS, DEFAULT_WINDOW_SAMPLES
from app.models.core import PlantRecord, TimeSeries
from app.models.estimator import EstimatorSpec
from app.models.ensemble import WeightLogEntry
from app.models.evaluation import SimulationResult
from app.models.plant import DataProvenance, TrainedPlantModel
from app.services.ensemble import (
    adaptation_step,
    append_weight_log,
    combine,
    extend_pool,
    init_equal,
    pool_forecast_matrix,
    weight_log_entry,
)
from app.services.plant_pipeline import predict_scaled, train_plant_model
from app.services.timeseries import rescale_by_peak
from app.utils.config import CashConfig
from app.utils.date import samples_per_day
from app.utils.errors import InvalidPoolError, InvalidSeriesError
from app.utils.logging import get_logger

logger = get_logger("simulation")


def day_bounds(n_samples: int, per_day: int) -> List[Tuple[int, int]]:
    """
    Sample ranges of the days of a series; the last day may be partial.

    Examples:
        >>> day_bounds(10, 4)
        [(0, 4), (4, 8), (8, 10)]
    """
    return [(b, min(b + per_day, n_samples)) for b in range(0, n_samples, per_day)]


def _is_cycle_start(day: int, cycle_days: int) -> bool:
    return day > 0 and day % cycle_days == 0


def simulate_ensemble(
    rec: PlantRecord,
    pool: Sequence[TrainedPlantModel],
    cycle_days: int = DEFAULT_CYCLE_DAYS,
    window_samples: int = DEFAULT_WINDOW_SAMPLES,
    adapt: bool = True,
    pool_forecasts: Optional[np.ndarray] = None,
    own_model_after_days: Optional[int] = None,
    seed: int = 0,
    cash: Optional[CashConfig] = None,
    log_path: Optional[Union[str, Path]] = None,
) -> SimulationResult:
    """
    Replay the ensemble forecast of a target plant day by day.

    With ``adapt=False`` the weights stay equal throughout (Averaging).

    With ``own_model_after_days`` set, a model of the target plant is
    trained at the start of that day on everything measured so far and
    appended to the pool. Later windows only use samples from that day on.

    Args:
        rec: Test-period record of the target plant
        pool: Pretrained pool models
        cycle_days: Days between adaptations (C)
        window_samples: Samples per optimization window (K)
        adapt: Whether weights are adapted
        pool_forecasts: Scaled pool forecasts over ``rec``, shape (n, N);
            computed day by day when omitted
        own_model_after_days: Day on which the plant's own model joins the pool
        seed: CASH seed of the own model
        cash: Search settings of the own model
        log_path: Weight log appended to as entries are produced

    Returns:
        SimulationResult

    Raises:
        InvalidPoolError: On an invalid pool or schedule
        InvalidSeriesError: If pool_forecasts does not match the record
        InsufficientDataError: If too little was measured for the own model
    """
    per_day = samples_per_day(rec.power.step)
    n = len(rec.power)
    state = init_equal(list(pool), rec.p_n, cycle_days, window_samples)
    if own_model_after_days is not None and not 0 < own_model_after_days < -(-n // per_day):
        raise InvalidPoolError(
            "Own model must join the pool within the test period",
            details={"day": own_model_after_days},
        )

    if pool_forecasts is None:
        F = np.empty((n, len(pool)))
        fill = True
    else:
        F = np.array(pool_forecasts, dtype=np.float64)
        fill = False
        if F.shape != (n, len(pool)):
            raise InvalidSeriesError(
                "Pool forecasts do not match the record",
                details={"shape": list(F.shape), "expected": [n, len(pool)]},
            )

    scaled = np.empty(n)
    log: List[WeightLogEntry] = []

    def record(timestamp: datetime) -> None:
        entry = weight_log_entry(state, timestamp)
        log.append(entry)
        if log_path is not None:
            append_weight_log(log_path, entry)

    record(rec.power.start)
    days = day_bounds(n, per_day)
    logger.info(
        "Simulation started",
        plant_id=rec.id,
        pool=state.pool_ids,
        days=len(days),
        adapt=adapt,
    )

    since = 0
    for day, (begin, end) in enumerate(days):
        if day == own_model_after_days:
            own = train_plant_model(rec.slice(0, begin), seed=seed, cash=cash, min_days=day)
            state = extend_pool(state, own)
            weather = rec.weather_forecast
            F = np.column_stack([F, predict_scaled(own, weather.g_hat, weather.t_hat).values])
            pool = state.pool
            since = begin
            logger.info("Own model joined the pool", plant_id=rec.id, day=day, pool=len(pool))
            record(rec.power.start + begin * rec.power.step)
        if adapt and _is_cycle_start(day, cycle_days):
            state = adaptation_step(state, rec.power.slice(since, begin), F[since:begin])
            record(rec.power.start + begin * rec.power.step)
        if fill:
            weather = rec.weather_forecast.slice(begin, end)
            F[begin:end] = pool_forecast_matrix(pool, weather.g_hat, weather.t_hat)
        scaled[begin:end] = combine(F[begin:end], state.weights)

    if adapt and n % per_day == 0 and _is_cycle_start(len(days), cycle_days):
        state = adaptation_step(state, rec.power.slice(since), F[since:])
        record(rec.power.end)

    scaled_series = rec.power.with_values(scaled)
    F.setflags(write=False)
    logger.info(
        "Simulation finished",
        plant_id=rec.id,
        adaptations=len(log) - 1,
        weights=[round(w, 6) for w in state.weights.w],
    )
    return SimulationResult(
        plant_id=rec.id,
        forecast=rescale_by_peak(scaled_series, rec.p_n),
        scaled_forecast=scaled_series,
        pool_forecasts=F,
        weight_log=log,
        final_state=state,
    )


def individual_forecast(model: TrainedPlantModel, rec: PlantRecord) -> TimeSeries:
    """Forecast (kW) of a plant's own pretrained model over a record."""
    scaled = predict_scaled(model, rec.weather_forecast.g_hat, rec.weather_forecast.t_hat)
    return rescale_by_peak(scaled, rec.p_n)


def simulate_incremental(
    rec: PlantRecord,
    cycle_days: int = DEFAULT_CYCLE_DAYS,
    seed: int = 0,
    cash: Optional[CashConfig] = None,
    spec: Optional[EstimatorSpec] = None,
) -> Tuple[TimeSeries, List[DataProvenance]]:
    """
    Individual model retrained every C days on all test data seen so far.

    The first retraining (after C days) runs a CASH search unless ``spec``
    is given; later cycles refit the selected spec. Days before the first
    model exist are forecast as 0.

    Args:
        rec: Test-period record of the plant
        cycle_days: Days between retrainings
        seed: CASH seed
        cash: Search settings
        spec: Spec to refit every cycle instead of searching first

    Returns:
        Tuple (forecast in kW, provenance of every trained model)
    """
    per_day = samples_per_day(rec.power.step)
    n = len(rec.power)
    out = np.zeros(n)
    provenances: List[DataProvenance] = []
    model: Optional[TrainedPlantModel] = None

    for day, (begin, end) in enumerate(day_bounds(n, per_day)):
        if _is_cycle_start(day, cycle_days):
            history = rec.slice(0, begin)
            model = train_plant_model(
                history, seed=seed, cash=cash, spec=spec, min_days=cycle_days
            )
            spec = model.estimator.spec
            provenances.append(model.provenance)
            logger.debug(
                "Individual model retrained",
                plant_id=rec.id,
                day=day,
                spec=spec.label(),
            )
        if model is not None:
            weather = rec.weather_forecast.slice(begin, end)
            out[begin:end] = predict_scaled(model, weather.g_hat, weather.t_hat).values

    return rescale_by_peak(rec.power.with_values(out), rec.p_n), provenances
