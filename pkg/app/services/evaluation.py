"""
Plant-wise leave-one-out evaluation of the forecasting methods.

For every plant of a fleet the pool is made of the pretrained models of all
other plants. The test period is replayed day-ahead with equal weights
(Averaging) and with adapted weights (AutoPV), and compared with the plant's
own pretrained model (IM-HDA) and an own model retrained on the test data
seen so far (IM-IT). Errors are nMAE over all test samples, nights included.
"""

import multiprocessing
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from app.core.constants import (
    METHOD_AUTOPV,
    METHOD_AVERAGING,
    METHOD_IM_HDA,
    METHOD_IM_IT,
    METHODS,
    SUMMER_MONTHS,
)
from app.models.core import PlantRecord, TimeSeries, ensure_aligned
from app.models.ensemble import AdaptationStatus, WeightLogEntry
from app.models.evaluation import (
    ConsistencyReport,
    EvaluationReport,
    FoldOutcome,
    PlantScores,
    RunMetadata,
    SeasonalWeights,
    SimulationResult,
)
from app.models.plant import TrainedPlantModel
from app.services.ensemble import select_diverse_pool
from app.services.plant_pipeline import predict_scaled, train_plant_model
from app.services.serialization import read_json, write_json
from app.services.simulation import (
    individual_forecast,
    simulate_ensemble,
    simulate_incremental,
)
from app.utils.config import CashConfig
from app.utils.csv_utils import records_frame, write_frame_csv
from app.utils.date import samples_per_day
from app.utils.errors import InvalidDataError, InvalidPoolError, UndefinedMetricError
from app.utils.formatting import format_float, format_percent, format_table
from app.utils.logging import get_logger
from app.utils.validation import validate_unique_ids

logger = get_logger("evaluation")

REPORT_JSON = "report.json"
REPORT_TEXT = "report.txt"
CONSISTENCY_JSON = "consistency.json"
WEIGHTS_CSV = "weights.csv"
CONSISTENCY_WEIGHTS_CSV = "consistency_weights.csv"
DAILY_CURVE_DIR = "daily_curves"


def nmae(forecast: TimeSeries, actual: TimeSeries) -> float:
    """
    Mean absolute error normalized by total generation.

    Examples:
        >>> from datetime import datetime, timezone
        >>> t0 = datetime(2020, 6, 1, tzinfo=timezone.utc)
        >>> actual = TimeSeries(start=t0, values=np.array([0.0, 2.0, 2.0]))
        >>> nmae(actual.with_values(np.array([0.0, 1.0, 3.0])), actual)
        0.5
        >>> nmae(actual.with_values(np.zeros(3)), actual)
        1.0

    Raises:
        InvalidSeriesError: If the series are not aligned
        UndefinedMetricError: If the actual series sums to zero
    """
    ensure_aligned(forecast, actual)
    total = float(np.sum(actual.values))
    if total <= 0.0:
        raise UndefinedMetricError(
            "nMAE is undefined for a plant without generation", details={"sum": total}
        )
    return float(np.sum(np.abs(forecast.values - actual.values)) / total)


class FoldSettings(BaseModel):
    """Everything a fold needs besides the data."""

    model_config = ConfigDict(frozen=True)

    cycle_days: int
    window_samples: int
    seed: int = 0
    cash: CashConfig = Field(default_factory=CashConfig)
    methods: List[str] = Field(default_factory=lambda: list(METHODS))
    pool_size: Optional[int] = Field(None, ge=2)


def split_record(
    rec: PlantRecord, pretrain_days: int, test_days: int
) -> Tuple[PlantRecord, PlantRecord]:
    """
    Pretraining and test parts of a record, counted in days from its start.

    Raises:
        InvalidDataError: If the record is shorter than both periods
    """
    per_day = samples_per_day(rec.power.step)
    cut, stop = pretrain_days * per_day, (pretrain_days + test_days) * per_day
    if stop > len(rec.power):
        raise InvalidDataError(
            "Record is shorter than the pretraining and test periods",
            details={"plant_id": rec.id, "samples": len(rec.power), "required": stop},
        )
    return rec.slice(0, cut), rec.slice(cut, stop)


def split_fleet(
    fleet: Sequence[PlantRecord], pretrain_days: int, test_days: int
) -> Tuple[List[PlantRecord], List[PlantRecord]]:
    parts = [split_record(rec, pretrain_days, test_days) for rec in fleet]
    return [p for p, _ in parts], [t for _, t in parts]


def _run_parallel(func, jobs: List[Tuple[tuple, dict]], workers: int) -> list:
    """Apply ``func`` to every job, in a process pool when workers > 1; order kept."""
    if workers <= 1 or len(jobs) <= 1:
        return [func(*args, **kwargs) for args, kwargs in jobs]
    with multiprocessing.Pool(processes=min(workers, len(jobs))) as pool:
        pending = [pool.apply_async(func, args=args, kwds=kwargs) for args, kwargs in jobs]
        return [p.get() for p in pending]


def pretrain_fleet(
    records: Sequence[PlantRecord],
    seed: int = 0,
    cash: Optional[CashConfig] = None,
    workers: int = 1,
) -> Dict[str, TrainedPlantModel]:
    """
    Train one model per plant on its pretraining record.

    Returns:
        Plant id to trained model, in fleet order
    """
    jobs = [((rec,), {"seed": seed, "cash": cash}) for rec in records]
    models = _run_parallel(train_plant_model, jobs, workers)
    return {m.plant_id: m for m in models}


def check_provenance(
    models: Sequence[TrainedPlantModel], start, end, role: str
) -> None:
    """
    Raises:
        InvalidDataError: If a model was trained on data inside ``[start, end)``
    """
    for m in models:
        if m.provenance.overlaps(start, end):
            raise InvalidDataError(
                f"{role} model was trained on forbidden data",
                details={
                    "plant_id": m.plant_id,
                    "trained": [m.provenance.start.isoformat(), m.provenance.end.isoformat()],
                    "forbidden": [start.isoformat(), end.isoformat()],
                },
            )


def daily_curve(rec: PlantRecord, sim: SimulationResult) -> pd.DataFrame:
    """
    Plot data of the test day with the largest measured energy.

    Columns: timestamp, measured power (kW and scaled), every scaled pool
    forecast, the scaled ensemble forecast and the re-scaled forecast (kW).
    """
    per_day = samples_per_day(rec.power.step)
    n_days = len(rec.power) // per_day
    energy = rec.power.values[: n_days * per_day].reshape(n_days, per_day).sum(axis=1)
    day = int(np.argmax(energy))
    rows = slice(day * per_day, (day + 1) * per_day)

    frame = pd.DataFrame(
        {
            "timestamp": rec.power.timestamps()[rows].strftime("%Y-%m-%dT%H:%M:%SZ"),
            "measured_kw": rec.power.values[rows],
            "measured_scaled": rec.power.values[rows] / rec.p_n,
        }
    )
    for j, pool_id in enumerate(sim.final_state.pool_ids):
        frame[f"pool_{pool_id}_scaled"] = sim.pool_forecasts[rows, j]
    frame["ensemble_scaled"] = sim.scaled_forecast.values[rows]
    frame["forecast_kw"] = sim.forecast.values[rows]
    return frame


def diverse_pool(
    pool: Sequence[TrainedPlantModel], rec: PlantRecord, size: Optional[int]
) -> List[TrainedPlantModel]:
    """
    The ``size`` pool models whose scaled forecasts over the record's weather
    forecast are most mutually distant, in pool order. The whole pool when
    ``size`` is None or not smaller than the pool.
    """
    if size is None or size >= len(pool):
        return list(pool)
    weather = rec.weather_forecast
    forecasts = {
        m.plant_id: predict_scaled(m, weather.g_hat, weather.t_hat).values for m in pool
    }
    keep = set(select_diverse_pool(forecasts, size))
    return [m for m in pool if m.plant_id in keep]


def evaluate_fold(
    target_id: str,
    models: Dict[str, TrainedPlantModel],
    test: Dict[str, PlantRecord],
    settings: FoldSettings,
) -> FoldOutcome:
    """
    Score every enabled method on one held-out plant.

    Raises:
        InvalidPoolError: If fewer than two other plants are available
        InvalidDataError: If a model saw data it must not see
    """
    rec = test[target_id]
    test_start, test_end = rec.power.start, rec.power.end
    pool = [m for pid, m in models.items() if pid != target_id]
    if len(pool) < 2:
        raise InvalidPoolError(
            "Leave-one-out needs at least three plants", details={"plants": len(models)}
        )
    check_provenance(pool, test_start, test_end, "Pool")
    pool = diverse_pool(pool, rec, settings.pool_size)
    logger.info("Fold started", plant_id=target_id, pool=len(pool))

    scores: Dict[str, float] = {}
    weight_log: List[WeightLogEntry] = []
    curve = None

    if METHOD_IM_HDA in settings.methods:
        own = models[target_id]
        check_provenance([own], test_start, test_end, METHOD_IM_HDA)
        scores[METHOD_IM_HDA] = nmae(individual_forecast(own, rec), rec.power)

    if METHOD_IM_IT in settings.methods:
        forecast, provenances = simulate_incremental(
            rec, settings.cycle_days, seed=settings.seed, cash=settings.cash
        )
        for p in provenances:
            if p.start < test_start:
                raise InvalidDataError(
                    "Incremental model was trained on pretraining data",
                    details={"plant_id": target_id, "start": p.start.isoformat()},
                )
        scores[METHOD_IM_IT] = nmae(forecast, rec.power)

    shared = None
    if METHOD_AUTOPV in settings.methods:
        sim = simulate_ensemble(
            rec, pool, settings.cycle_days, settings.window_samples, adapt=True
        )
        shared = sim.pool_forecasts
        scores[METHOD_AUTOPV] = nmae(sim.forecast, rec.power)
        weight_log = sim.weight_log
        curve = daily_curve(rec, sim)

    if METHOD_AVERAGING in settings.methods:
        avg = simulate_ensemble(
            rec,
            pool,
            settings.cycle_days,
            settings.window_samples,
            adapt=False,
            pool_forecasts=shared,
        )
        scores[METHOD_AVERAGING] = nmae(avg.forecast, rec.power)
        if curve is None:
            curve = daily_curve(rec, avg)

    logger.info(
        "Fold finished",
        plant_id=target_id,
        **{k: round(v, 6) for k, v in scores.items()},
    )
    return FoldOutcome(
        scores=PlantScores(
            plant_id=target_id, nmae={m: scores[m] for m in settings.methods}
        ),
        weight_log=weight_log,
        daily_curve=curve,
    )


def _ordered_methods(methods: Optional[Sequence[str]]) -> List[str]:
    if methods is None:
        return list(METHODS)
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise InvalidDataError("Unknown methods", details={"methods": sorted(unknown)})
    return [m for m in METHODS if m in methods]


def _check_fleet(fleet: Sequence[PlantRecord]) -> None:
    if len(fleet) < 3:
        raise InvalidPoolError(
            "Leave-one-out needs at least three plants", details={"plants": len(fleet)}
        )
    validate_unique_ids([rec.id for rec in fleet])


def leave_one_out_folds(
    fleet: Sequence[PlantRecord],
    pretrain_days: int,
    test_days: int,
    cycle_days: int,
    window_samples: int,
    seed: int = 0,
    fleet_seed: int = 0,
    cash: Optional[CashConfig] = None,
    methods: Optional[Sequence[str]] = None,
    workers: int = 1,
    pretrained: Optional[Dict[str, TrainedPlantModel]] = None,
    pool_size: Optional[int] = None,
) -> Tuple[RunMetadata, List[FoldOutcome]]:
    """
    Run every leave-one-out fold.

    Args:
        fleet: Full-length plant records
        pretrain_days: Days from the start used for pretraining
        test_days: Days after the pretraining period used for testing
        cycle_days: Adaptation cycle (C)
        window_samples: Adaptation window (K)
        seed: Run seed for searches
        fleet_seed: Seed the fleet was generated with, for the metadata
        cash: Search settings
        methods: Methods to score (all by default)
        workers: Parallel folds (and pretraining)
        pretrained: Pool models trained beforehand on the pretraining period
        pool_size: Keep only this many mutually diverse pool models per fold

    Returns:
        Tuple (run metadata, fold outcomes in fleet order)
    """
    _check_fleet(fleet)
    cash = cash or CashConfig()
    methods = _ordered_methods(methods)
    pre, test = split_fleet(fleet, pretrain_days, test_days)

    if pretrained is None:
        pretrained = pretrain_fleet(pre, seed=seed, cash=cash, workers=workers)
    missing = [rec.id for rec in fleet if rec.id not in pretrained]
    if missing:
        raise InvalidPoolError("Pretrained models are missing", details={"plants": missing})
    models = {rec.id: pretrained[rec.id] for rec in fleet}

    settings = FoldSettings(
        cycle_days=cycle_days,
        window_samples=window_samples,
        seed=seed,
        cash=cash,
        methods=methods,
        pool_size=pool_size,
    )
    test_by_id = {rec.id: rec for rec in test}
    jobs = [((rec.id, models, test_by_id, settings), {}) for rec in fleet]
    outcomes = _run_parallel(evaluate_fold, jobs, workers)

    metadata = RunMetadata(
        fleet_seed=fleet_seed,
        run_seed=seed,
        cycle_days=cycle_days,
        window_samples=window_samples,
        pretrain_days=pretrain_days,
        test_days=test_days,
        methods=methods,
        pool_size=pool_size,
    )
    return metadata, outcomes


def assemble_report(
    metadata: RunMetadata, outcomes: Sequence[FoldOutcome]
) -> EvaluationReport:
    return EvaluationReport(
        metadata=metadata,
        plants=[o.scores for o in outcomes],
        weight_logs={o.scores.plant_id: o.weight_log for o in outcomes if o.weight_log},
    )


def run_leave_one_out(
    fleet: Sequence[PlantRecord],
    pretrain_days: int,
    test_days: int,
    cycle_days: int,
    window_samples: int,
    seed: int = 0,
    **kwargs,
) -> EvaluationReport:
    """
    Leave-one-out report of a fleet; see :func:`leave_one_out_folds` for
    the keyword arguments.
    """
    metadata, outcomes = leave_one_out_folds(
        fleet, pretrain_days, test_days, cycle_days, window_samples, seed=seed, **kwargs
    )
    report = assemble_report(metadata, outcomes)
    logger.info("Leave-one-out finished", plants=len(report.plants), mean=report.mean)
    return report


def seasonal_weights(plant_id: str, log: Sequence[WeightLogEntry]) -> SeasonalWeights:
    """
    Mean weight of the plant's own model from the first successful
    adaptation on, overall and split into summer (Apr-Sep) and winter.
    """
    first = next(
        (i for i, e in enumerate(log) if e.status == AdaptationStatus.ADAPTED), None
    )
    if first is None:
        return SeasonalWeights(plant_id=plant_id)

    summer, winter = [], []
    for entry in log[first:]:
        if plant_id not in entry.pool_ids:
            continue
        w = entry.weights[entry.pool_ids.index(plant_id)]
        (summer if entry.timestamp.month in SUMMER_MONTHS else winter).append(w)

    def mean(values: List[float]) -> Optional[float]:
        return float(np.mean(values)) if values else None

    return SeasonalWeights(
        plant_id=plant_id,
        summer=mean(summer),
        winter=mean(winter),
        overall=mean(summer + winter),
    )


def consistency_fold(
    target_id: str,
    models: Dict[str, TrainedPlantModel],
    test: Dict[str, PlantRecord],
    settings: FoldSettings,
) -> List[WeightLogEntry]:
    rec = test[target_id]
    pool = list(models.values())
    check_provenance(pool, rec.power.start, rec.power.end, "Pool")
    sim = simulate_ensemble(rec, pool, settings.cycle_days, settings.window_samples)
    return sim.weight_log


def run_consistency(
    fleet: Sequence[PlantRecord],
    pretrain_days: int,
    test_days: int,
    cycle_days: int,
    window_samples: int,
    seed: int = 0,
    fleet_seed: int = 0,
    cash: Optional[CashConfig] = None,
    workers: int = 1,
    pretrained: Optional[Dict[str, TrainedPlantModel]] = None,
) -> ConsistencyReport:
    """
    Adapt the weights of every plant with its own model kept in the pool.

    Returns:
        Weight logs per plant and the seasonal own-model weight summary
    """
    _check_fleet(fleet)
    cash = cash or CashConfig()
    pre, test = split_fleet(fleet, pretrain_days, test_days)
    if pretrained is None:
        pretrained = pretrain_fleet(pre, seed=seed, cash=cash, workers=workers)
    models = {rec.id: pretrained[rec.id] for rec in fleet}

    settings = FoldSettings(
        cycle_days=cycle_days, window_samples=window_samples, seed=seed, cash=cash
    )
    test_by_id = {rec.id: rec for rec in test}
    jobs = [((rec.id, models, test_by_id, settings), {}) for rec in fleet]
    logs = _run_parallel(consistency_fold, jobs, workers)

    weight_logs = {rec.id: log for rec, log in zip(fleet, logs)}
    seasonal = [seasonal_weights(pid, log) for pid, log in weight_logs.items()]
    logger.info("Consistency run finished", plants=len(weight_logs))
    return ConsistencyReport(
        metadata=RunMetadata(
            fleet_seed=fleet_seed,
            run_seed=seed,
            cycle_days=cycle_days,
            window_samples=window_samples,
            pretrain_days=pretrain_days,
            test_days=test_days,
            methods=[METHOD_AUTOPV],
        ),
        weight_logs=weight_logs,
        seasonal=seasonal,
    )


def report_table(report: EvaluationReport, decimals: int = 3) -> str:
    """Text table: one row per plant, one column per method, mean row last."""
    methods = report.metadata.methods
    rows = [
        [p.plant_id] + [format_float(p.nmae[m], decimals) for m in methods]
        for p in report.plants
    ]
    rows.append(["Mean"] + [format_float(report.mean[m], decimals) for m in methods])
    meta = report.metadata
    header = (
        f"nMAE leave-one-out (C={meta.cycle_days} d, K={meta.window_samples}, "
        f"fleet seed {meta.fleet_seed}, run seed {meta.run_seed})"
    )
    text = header + "\n\n" + format_table(["Plant"] + methods, rows) + "\n"
    reference = report.mean.get(METHOD_IM_HDA)
    if METHOD_AUTOPV in report.mean and reference:
        gap = report.mean[METHOD_AUTOPV] / reference - 1.0
        text += f"\n{METHOD_AUTOPV} vs {METHOD_IM_HDA}: {format_percent(gap)}\n"
    return text


def consistency_table(report: ConsistencyReport, decimals: int = 3) -> str:
    rows = [
        [s.plant_id]
        + [format_float(v, decimals) for v in (s.summer, s.winter, s.overall)]
        for s in report.seasonal
    ]
    return format_table(["Plant", "Summer", "Winter", "Overall"], rows) + "\n"


def weights_frame(weight_logs: Dict[str, List[WeightLogEntry]]) -> pd.DataFrame:
    """Long-format weight history: one row per plant, entry and pool model."""
    rows = [
        {
            "plant_id": plant_id,
            "timestamp": entry.timestamp.strftime("%Y-%m-%dT%H:%M:%SZ"),
            "status": entry.status.value,
            "pool_id": pool_id,
            "weight": weight,
            "window_mse": entry.window_mse,
        }
        for plant_id, log in weight_logs.items()
        for entry in log
        for pool_id, weight in zip(entry.pool_ids, entry.weights)
    ]
    return records_frame(rows)


def write_report(
    report: EvaluationReport,
    directory: Union[str, Path],
    daily_curves: Optional[Dict[str, pd.DataFrame]] = None,
) -> List[Path]:
    """
    Write the JSON report, the text table, the weight history CSV and the
    daily curve CSVs.

    Returns:
        Written paths
    """
    directory = Path(directory)
    paths = [
        write_json(directory / REPORT_JSON, report.model_dump(mode="json"), sort_keys=False)
    ]
    text = directory / REPORT_TEXT
    text.write_text(report_table(report))
    paths.append(text)
    if report.weight_logs:
        paths.append(write_frame_csv(weights_frame(report.weight_logs), directory / WEIGHTS_CSV))
    for plant_id, frame in (daily_curves or {}).items():
        paths.append(
            write_frame_csv(frame, directory / DAILY_CURVE_DIR / f"{plant_id}.csv")
        )
    return paths


def write_consistency(report: ConsistencyReport, directory: Union[str, Path]) -> List[Path]:
    directory = Path(directory)
    return [
        write_json(directory / CONSISTENCY_JSON, report.model_dump(mode="json")),
        write_frame_csv(
            weights_frame(report.weight_logs), directory / CONSISTENCY_WEIGHTS_CSV
        ),
    ]


def read_report(path: Union[str, Path]) -> EvaluationReport:
    return EvaluationReport.model_validate(read_json(path))


def read_consistency(path: Union[str, Path]) -> ConsistencyReport:
    return ConsistencyReport.model_validate(read_json(path))
