"""Pytest configuration for the AutoPV tests."""

import os
import sys
from datetime import date, datetime, timedelta, timezone
from types import SimpleNamespace
from typing import Callable, Dict, List

import numpy as np
import pytest

# Make the "app" package importable
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.core.constants import DEFAULT_STEP, N_FEATURES, SAMPLES_PER_DAY
from app.models.core import FeatureStats, PlantRecord, TimeSeries, WeatherForecast
from app.models.estimator import (
    EstimatorKind,
    EstimatorSpec,
    RidgeParams,
    TrainedEstimator,
    TrainingMetadata,
)
from app.models.plant import DataProvenance, TrainedPlantModel
from app.services.evaluation import pretrain_fleet, split_fleet
from app.services.regressors.ridge import RidgeRegressor
from app.services.synthetic import default_fleet_configs, generate_fleet
from app.utils.config import (
    AdaptationConfig,
    CashConfig,
    FleetConfig,
    PathsConfig,
    RunConfig,
    SplitConfig,
)

# Small fleet shared by the service and command tests
FLEET_START = date(2020, 4, 1)
PRETRAIN_DAYS = 61
TEST_DAYS = 14
FLEET_DAYS = PRETRAIN_DAYS + TEST_DAYS
CYCLE_DAYS = 7
WINDOW_SAMPLES = CYCLE_DAYS * SAMPLES_PER_DAY
FLEET_SEED = 7
PLANT_COUNT = 4


def holdout_start() -> datetime:
    return datetime.combine(
        FLEET_START + timedelta(days=PRETRAIN_DAYS), datetime.min.time(), tzinfo=timezone.utc
    )


@pytest.fixture(scope="session")
def fleet_settings() -> SimpleNamespace:
    """
    Dimensions of the small fleet.

    Returns:
        Namespace with start, pretrain_days, test_days, cycle_days,
        window_samples, seed and holdout_start
    """
    return SimpleNamespace(
        start=FLEET_START,
        pretrain_days=PRETRAIN_DAYS,
        test_days=TEST_DAYS,
        cycle_days=CYCLE_DAYS,
        window_samples=WINDOW_SAMPLES,
        seed=FLEET_SEED,
        plant_count=PLANT_COUNT,
        holdout_start=holdout_start(),
    )


@pytest.fixture
def series_start() -> datetime:
    """
    Start timestamp used by hand-built series.

    Returns:
        2020-06-01 00:00 UTC
    """
    return datetime(2020, 6, 1, tzinfo=timezone.utc)


@pytest.fixture
def make_series(series_start: datetime) -> Callable[..., TimeSeries]:
    """
    Factory for quarter-hourly series.

    Returns:
        Function (values, start=None, step=None) -> TimeSeries
    """

    def _make(values, start=None, step=None) -> TimeSeries:
        return TimeSeries(
            start=start or series_start,
            step=step or DEFAULT_STEP,
            values=np.asarray(values, dtype=np.float64),
        )

    return _make


@pytest.fixture
def make_record(make_series) -> Callable[..., PlantRecord]:
    """
    Factory for plant records from raw power and weather arrays.

    Returns:
        Function (power, g_hat, t_hat, plant_id="p1", p_n=10.0) -> PlantRecord
    """

    def _make(power, g_hat, t_hat, plant_id: str = "p1", p_n: float = 10.0) -> PlantRecord:
        return PlantRecord(
            id=plant_id,
            p_n=p_n,
            power=make_series(power),
            weather_forecast=WeatherForecast(g_hat=make_series(g_hat), t_hat=make_series(t_hat)),
        )

    return _make


@pytest.fixture(scope="session")
def cash_config() -> CashConfig:
    """
    Cheap Ridge-only search.

    Returns:
        CashConfig instance
    """
    return CashConfig(max_trials=3, kinds=[EstimatorKind.RIDGE])


@pytest.fixture(scope="session")
def ridge_spec() -> EstimatorSpec:
    return EstimatorSpec(params=RidgeParams(alpha=0.05))


@pytest.fixture
def constant_model(ridge_spec) -> Callable[..., TrainedPlantModel]:
    """
    Factory for plant models whose estimator returns one value for every row.

    Returns:
        Function (intercept, plant_id="p1", p_n=10.0) -> TrainedPlantModel
    """

    def _make(intercept: float, plant_id: str = "p1", p_n: float = 10.0) -> TrainedPlantModel:
        stats = FeatureStats(mean=[0.0] * N_FEATURES, std=[1.0] * N_FEATURES)
        model = RidgeRegressor.from_state(
            ridge_spec,
            {"coef": [0.0] * N_FEATURES, "intercept": intercept, "stats": stats.model_dump()},
        )
        return TrainedPlantModel(
            plant_id=plant_id,
            p_n=p_n,
            estimator=TrainedEstimator(
                spec=ridge_spec,
                model=model,
                metadata=TrainingMetadata(n_rows=0, iterations=0, training_loss=0.0),
            ),
            feature_stats=stats,
            provenance=DataProvenance(
                start=datetime(2020, 1, 1, tzinfo=timezone.utc),
                end=datetime(2020, 3, 1, tzinfo=timezone.utc),
            ),
        )

    return _make


@pytest.fixture(scope="session")
def small_fleet() -> List[PlantRecord]:
    """
    Four single-roof synthetic plants over 75 days, pretraining first.

    Returns:
        List of PlantRecord
    """
    configs = default_fleet_configs(holdout_start(), plant_count=PLANT_COUNT)
    return generate_fleet(configs, FLEET_START, FLEET_DAYS, FLEET_SEED)


@pytest.fixture(scope="session")
def fleet_split(small_fleet):
    """
    Pretraining and test records of the small fleet.

    Returns:
        Tuple (pretraining records, test records)
    """
    return split_fleet(small_fleet, PRETRAIN_DAYS, TEST_DAYS)


@pytest.fixture(scope="session")
def pretrained(fleet_split, cash_config) -> Dict[str, TrainedPlantModel]:
    """
    One searched model per plant of the small fleet.

    Returns:
        Plant id to TrainedPlantModel
    """
    pre, _ = fleet_split
    return pretrain_fleet(pre, seed=0, cash=cash_config)


@pytest.fixture
def run_config(tmp_path, cash_config) -> RunConfig:
    """
    Run configuration of the small fleet with every directory under tmp_path.

    Returns:
        RunConfig instance
    """
    return RunConfig(
        paths=PathsConfig(
            data_dir=tmp_path / "data",
            model_dir=tmp_path / "models",
            report_dir=tmp_path / "reports",
        ),
        adaptation=AdaptationConfig(cycle_days=CYCLE_DAYS, window_samples=WINDOW_SAMPLES),
        fleet=FleetConfig(start=FLEET_START, days=FLEET_DAYS, plant_count=PLANT_COUNT),
        split=SplitConfig(pretrain_days=PRETRAIN_DAYS, test_days=TEST_DAYS),
        cash=cash_config,
    )
