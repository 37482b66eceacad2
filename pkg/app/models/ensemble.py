from datetime import datetime
from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.constants import DEFAULT_CYCLE_DAYS, DEFAULT_WINDOW_SAMPLES, SIMPLEX_TOL
from app.models.plant import TrainedPlantModel
from app.utils.errors import InvalidPlantError, InvalidPoolError


class WeightVector(BaseModel):
    """
    Ensemble weights aligned with the pool order.

    Every weight lies in [0, 1] and the weights sum to 1 (to ``SIMPLEX_TOL``).
    """

    model_config = ConfigDict(frozen=True)

    w: List[float]

    @field_validator("w")
    def on_simplex(cls, v: List[float]) -> List[float]:
        array = np.asarray(v, dtype=np.float64)
        if array.size == 0:
            raise InvalidPoolError("Weight vector is empty")
        if np.any(array < -SIMPLEX_TOL) or np.any(array > 1.0 + SIMPLEX_TOL):
            raise InvalidPoolError("Weights must lie in [0, 1]", details={"w": v})
        if abs(array.sum() - 1.0) > SIMPLEX_TOL:
            raise InvalidPoolError(
                "Weights must sum to 1", details={"sum": float(array.sum())}
            )
        return v

    @classmethod
    def equal(cls, n: int) -> "WeightVector":
        return cls(w=[1.0 / n] * n)

    def __len__(self) -> int:
        return len(self.w)

    def array(self) -> np.ndarray:
        return np.asarray(self.w, dtype=np.float64)


class AdaptationStatus(str, Enum):
    INITIAL = "initial"
    ADAPTED = "adapted"
    NOT_YET = "not_yet"
    DEGENERATE = "degenerate"
    EXTENDED = "extended"


class EnsembleState(BaseModel):
    """
    Pool, current weights and adaptation schedule of one target plant.

    Attributes:
        pool: Pretrained plant models (at least two)
        weights: Current weights, aligned with ``pool``
        p_n_new: Peak rating of the target plant (kW)
        cycle_days: Days between adaptations (C)
        window_samples: Samples per optimization window (K), at least the pool size
        last_adaptation: End of the window of the last successful adaptation
        last_status: Outcome of the most recent adaptation attempt
        last_window_mse: Scaled windowed MSE after the last adaptation attempt
    """

    model_config = ConfigDict(frozen=True)

    pool: List[TrainedPlantModel]
    weights: WeightVector
    p_n_new: float
    cycle_days: int = DEFAULT_CYCLE_DAYS
    window_samples: int = DEFAULT_WINDOW_SAMPLES
    last_adaptation: Optional[datetime] = None
    last_status: AdaptationStatus = AdaptationStatus.INITIAL
    last_window_mse: Optional[float] = Field(None, ge=0.0)

    @field_validator("p_n_new")
    def p_n_positive(cls, v: float) -> float:
        if not v > 0:
            raise InvalidPlantError(
                "Peak power rating must be positive", details={"p_n": v}
            )
        return v

    @model_validator(mode="after")
    def pool_consistent(self) -> "EnsembleState":
        n = len(self.pool)
        if n < 2:
            raise InvalidPoolError("Ensemble pool needs at least two models")
        if len(self.weights) != n:
            raise InvalidPoolError(
                "Weight count differs from pool size",
                details={"weights": len(self.weights), "pool": n},
            )
        if self.cycle_days < 1:
            raise InvalidPoolError("Adaptation cycle must be at least one day")
        if self.window_samples < n:
            raise InvalidPoolError(
                "Window must hold at least as many samples as pool models",
                details={"window_samples": self.window_samples, "pool": n},
            )
        return self

    @property
    def pool_ids(self) -> List[str]:
        return [m.plant_id for m in self.pool]


class WeightLogEntry(BaseModel):
    """One line of the append-only weight history."""

    timestamp: datetime
    status: AdaptationStatus
    pool_ids: List[str]
    weights: List[float]
    window_mse: Optional[float] = None
