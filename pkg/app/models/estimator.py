from enum import Enum
from typing import Annotated, Any, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.core.constants import (
    GB_LEARNING_RATE_RANGE,
    MAX_DEPTH_RANGE,
    MLP_LAYER_COUNT_RANGE,
    MLP_LAYER_WIDTH_RANGE,
    N_ESTIMATORS_RANGE,
    RIDGE_ALPHA_RANGE,
)


class EstimatorKind(str, Enum):
    RIDGE = "Ridge"
    MLP = "MLP"
    GRADIENT_BOOSTING = "GradientBoosting"
    RANDOM_FOREST = "RandomForest"


class Activation(str, Enum):
    LOGISTIC = "logistic"
    TANH = "tanh"
    RELU = "relu"


class RidgeParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["Ridge"] = "Ridge"
    alpha: float = Field(1.0, ge=RIDGE_ALPHA_RANGE[0], le=RIDGE_ALPHA_RANGE[1])


class MLPParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["MLP"] = "MLP"
    activation: Activation = Activation.RELU
    hidden_layer_sizes: List[int] = Field(default_factory=lambda: [100])

    @field_validator("hidden_layer_sizes")
    def layers_in_range(cls, v: List[int]) -> List[int]:
        low, high = MLP_LAYER_COUNT_RANGE
        if not low <= len(v) <= high:
            raise ValueError(f"MLP must have {low}..{high} hidden layers")
        w_low, w_high = MLP_LAYER_WIDTH_RANGE
        if any(not w_low <= width <= w_high for width in v):
            raise ValueError(f"Hidden layer widths must lie in {w_low}..{w_high}")
        return v


class GradientBoostingParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["GradientBoosting"] = "GradientBoosting"
    learning_rate: float = Field(
        0.1, ge=GB_LEARNING_RATE_RANGE[0], le=GB_LEARNING_RATE_RANGE[1]
    )
    n_estimators: int = Field(
        100, ge=N_ESTIMATORS_RANGE[0], le=N_ESTIMATORS_RANGE[1]
    )
    max_depth: int = Field(3, ge=MAX_DEPTH_RANGE[0], le=MAX_DEPTH_RANGE[1])


class RandomForestParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["RandomForest"] = "RandomForest"
    n_estimators: int = Field(
        100, ge=N_ESTIMATORS_RANGE[0], le=N_ESTIMATORS_RANGE[1]
    )
    max_depth: int = Field(5, ge=MAX_DEPTH_RANGE[0], le=MAX_DEPTH_RANGE[1])
    # Not part of the searched space; disabled only for degenerate checks.
    bootstrap: bool = True


EstimatorParams = Annotated[
    Union[RidgeParams, MLPParams, GradientBoostingParams, RandomForestParams],
    Field(discriminator="kind"),
]


class EstimatorSpec(BaseModel):
    """
    One point of the configuration space.

    Attributes:
        params: Kind-specific hyperparameters (validated against their ranges)
        seed: Seed for every random choice made during fitting
    """

    model_config = ConfigDict(frozen=True)

    params: EstimatorParams
    seed: int = 0

    @property
    def kind(self) -> EstimatorKind:
        return EstimatorKind(self.params.kind)

    def label(self) -> str:
        fields = self.params.model_dump(exclude={"kind"}, mode="json")
        inner = ", ".join(f"{k}={v}" for k, v in fields.items())
        return f"{self.kind.value}({inner})"


class TrainingMetadata(BaseModel):
    """Bookkeeping of a fit: iterations performed and final training loss."""

    n_rows: int
    iterations: int
    training_loss: float
    stopped_early: bool = False


class TrainedEstimator(BaseModel):
    """
    Fitted estimator: spec, learned parameters and training metadata.

    ``model`` is the regressor object holding the parameters ``p``; its
    ``predict`` is deterministic.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    spec: EstimatorSpec
    model: Any
    metadata: TrainingMetadata


class TrialRecord(BaseModel):
    """
    One CASH trial, scored on the hold-out split.

    Failed fits keep ``validation_mse`` unset and carry the error instead.
    """

    index: int
    spec: EstimatorSpec
    validation_mse: Optional[float] = Field(None, ge=0.0)
    wall_time: float = 0.0
    error: Optional[dict] = None

    @property
    def succeeded(self) -> bool:
        return self.validation_mse is not None


class SearchState(BaseModel):
    """
    Ordered trial log of a CASH run.

    Attributes:
        trials: Trials in index order
        best: Index into ``trials`` of the lowest validation MSE
        rng_seed: Seed of the search
        patience_counter: Qualifying completions since the plateau began
        stopped_by_plateau: Whether the plateau rule ended the search
    """

    trials: List[TrialRecord] = Field(default_factory=list)
    best: Optional[int] = None
    rng_seed: int = 0
    patience_counter: int = 0
    stopped_by_plateau: bool = False

    @property
    def best_trial(self) -> Optional[TrialRecord]:
        return None if self.best is None else self.trials[self.best]
