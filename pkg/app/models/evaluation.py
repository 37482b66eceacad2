from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.constants import REPORT_FORMAT_VERSION
from app.models.core import TimeSeries
from app.models.ensemble import EnsembleState, WeightLogEntry
from app.utils.errors import InvalidDataError


class SimulationResult(BaseModel):
    """
    Day-ahead replay of one target plant over its test period.

    Attributes:
        plant_id: Target plant
        forecast: Re-scaled ensemble forecast (kW)
        scaled_forecast: Ensemble forecast before re-scaling
        pool_forecasts: Scaled forecast of every pool model, shape (n, N)
        weight_log: Initial weights followed by one entry per adaptation attempt
        final_state: Ensemble state after the last adaptation
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    plant_id: str
    forecast: TimeSeries
    scaled_forecast: TimeSeries
    pool_forecasts: np.ndarray
    weight_log: List[WeightLogEntry]
    final_state: EnsembleState

    @property
    def adaptations(self) -> List[WeightLogEntry]:
        return self.weight_log[1:]


class PlantScores(BaseModel):
    """nMAE of each compared method for one plant."""

    plant_id: str
    nmae: Dict[str, float]

    @model_validator(mode="after")
    def non_negative(self) -> "PlantScores":
        for method, value in self.nmae.items():
            if not value >= 0.0:
                raise InvalidDataError(
                    "nMAE must be non-negative",
                    details={"plant_id": self.plant_id, "method": method, "nmae": value},
                )
        return self


class RunMetadata(BaseModel):
    fleet_seed: int
    run_seed: int
    cycle_days: int
    window_samples: int
    pretrain_days: int
    test_days: int
    methods: List[str]
    pool_size: Optional[int] = None


def mean_scores(plants: List[PlantScores], methods: List[str]) -> Dict[str, float]:
    return {
        method: float(np.mean([p.nmae[method] for p in plants])) for method in methods
    }


class EvaluationReport(BaseModel):
    """
    Leave-one-out comparison of the forecasting methods.

    The ``mean`` row is the arithmetic mean of the plant rows for every method.
    """

    format_version: str = REPORT_FORMAT_VERSION
    metadata: RunMetadata
    plants: List[PlantScores]
    mean: Dict[str, float] = Field(default_factory=dict)
    weight_logs: Dict[str, List[WeightLogEntry]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def mean_row(self) -> "EvaluationReport":
        for p in self.plants:
            missing = set(self.metadata.methods) - set(p.nmae)
            if missing:
                raise InvalidDataError(
                    "Plant row lacks methods",
                    details={"plant_id": p.plant_id, "missing": sorted(missing)},
                )
        expected = mean_scores(self.plants, self.metadata.methods) if self.plants else {}
        if not self.mean:
            self.mean = expected
        elif any(
            m not in self.mean or abs(self.mean[m] - v) > 1e-12 for m, v in expected.items()
        ):
            raise InvalidDataError(
                "Mean row does not match the plant rows", details={"mean": self.mean}
            )
        return self

    def scores(self, plant_id: str) -> Optional[PlantScores]:
        return next((p for p in self.plants if p.plant_id == plant_id), None)


class SeasonalWeights(BaseModel):
    """Mean own-model weight after the first adaptation, by season."""

    plant_id: str
    summer: Optional[float] = None
    winter: Optional[float] = None
    overall: Optional[float] = None


class ConsistencyReport(BaseModel):
    """Weight trajectories when each plant's own model stays in the pool."""

    metadata: RunMetadata
    weight_logs: Dict[str, List[WeightLogEntry]]
    seasonal: List[SeasonalWeights]


class FoldOutcome(BaseModel):
    """Everything one leave-one-out fold hands back to report assembly."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    scores: PlantScores
    weight_log: List[WeightLogEntry] = Field(default_factory=list)
    daily_curve: Optional[pd.DataFrame] = None
