"""Uniform fit/predict interface over the from-scratch regressors."""

from abc import ABC, abstractmethod
from typing import Any, Dict, Type, Union

import numpy as np

from app.core.constants import MIN_TRAINING_ROWS, N_FEATURES
from app.models.core import FeatureMatrix
from app.models.estimator import EstimatorSpec, TrainedEstimator, TrainingMetadata
from app.utils.errors import InsufficientDataError, InvalidDataError, ShapeError
from app.utils.logging import get_logger

logger = get_logger("regressors")


class BaseRegressor(ABC):
    """
    Base class for the estimator families.

    Subclasses learn their parameters in ``fit`` and must keep ``predict``
    free of randomness.
    """

    def __init__(self, spec: EstimatorSpec):
        self.spec = spec

    @abstractmethod
    def fit(self, X: np.ndarray, y: np.ndarray) -> TrainingMetadata:
        """Learn parameters from daytime rows."""

    @abstractmethod
    def predict(self, X: np.ndarray) -> np.ndarray:
        """Raw (unclipped) scaled power per row."""

    @abstractmethod
    def get_state(self) -> Dict[str, Any]:
        """Learned parameters as JSON-compatible values."""

    @classmethod
    @abstractmethod
    def from_state(
        cls, spec: EstimatorSpec, state: Dict[str, Any]
    ) -> "BaseRegressor":
        """Rebuild a fitted regressor from :meth:`get_state` output."""


_REGISTRY: Dict[str, Type[BaseRegressor]] = {}


def register(kind: str):
    """Class decorator adding a regressor to the kind registry."""

    def decorator(cls: Type[BaseRegressor]) -> Type[BaseRegressor]:
        _REGISTRY[kind] = cls
        return cls

    return decorator


def regressor_class(kind: str) -> Type[BaseRegressor]:
    return _REGISTRY[kind]


def as_matrix(X: Union[np.ndarray, FeatureMatrix]) -> np.ndarray:
    """
    Coerce estimator input to an (n, 9) float array.

    Raises:
        ShapeError: If the column count is not the canonical nine
    """
    values = X.values if isinstance(X, FeatureMatrix) else np.asarray(X, float)
    if values.ndim != 2 or values.shape[1] != N_FEATURES:
        raise ShapeError(
            f"Expected {N_FEATURES} feature columns",
            details={"shape": list(values.shape)},
        )
    return values


def check_training_data(X: np.ndarray, y: np.ndarray) -> None:
    if X.shape[0] != y.shape[0]:
        raise ShapeError(
            "Feature and target row counts differ",
            details={"rows": X.shape[0], "targets": y.shape[0]},
        )
    if X.shape[0] < MIN_TRAINING_ROWS:
        raise InsufficientDataError(
            f"At least {MIN_TRAINING_ROWS} training rows are required",
            details={"rows": int(X.shape[0])},
        )
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise InvalidDataError("Training data contains non-finite values")


def fit(
    spec: EstimatorSpec,
    X: Union[np.ndarray, FeatureMatrix],
    y: np.ndarray,
) -> TrainedEstimator:
    """
    Fit the estimator described by ``spec`` on daytime rows.

    Args:
        spec: Estimator kind, hyperparameters and seed
        X: Daytime feature rows (night rows already dropped)
        y: Scaled power per row

    Returns:
        TrainedEstimator

    Raises:
        InsufficientDataError: Fewer than 20 rows
        InvalidDataError: Non-finite inputs
        ShapeError: Wrong column count
    """
    X = as_matrix(X)
    y = np.asarray(y, dtype=np.float64).ravel()
    check_training_data(X, y)

    model = regressor_class(spec.kind.value)(spec)
    metadata = model.fit(X, y)
    logger.debug(
        "Estimator fitted",
        spec=spec.label(),
        n_rows=metadata.n_rows,
        iterations=metadata.iterations,
        training_loss=metadata.training_loss,
    )
    return TrainedEstimator(spec=spec, model=model, metadata=metadata)


def predict(
    est: TrainedEstimator, X: Union[np.ndarray, FeatureMatrix]
) -> np.ndarray:
    """
    Raw estimator output per row; may be negative or exceed 1.

    Raises:
        ShapeError: Wrong column count
    """
    values = as_matrix(X)
    if values.shape[0] == 0:
        return np.zeros(0)
    return est.model.predict(values)
