"""Closed-form ridge regression on standardized columns."""

from typing import Any, Dict, Optional

import numpy as np
from scipy.linalg import solve

from app.models.core import FeatureStats
from app.models.estimator import EstimatorSpec, TrainingMetadata
from app.services.features import apply_column_stats, fit_column_stats
from app.services.regressors.base import BaseRegressor, register


def ridge_solve(Z: np.ndarray, y_centered: np.ndarray, alpha: float) -> np.ndarray:
    """
    Solve (Z'Z + alpha I) beta = Z'y.

    Args:
        Z: Standardized design matrix
        y_centered: Target with its mean removed
        alpha: Penalty strength

    Returns:
        Coefficient vector beta
    """
    gram = Z.T @ Z + alpha * np.eye(Z.shape[1])
    return solve(gram, Z.T @ y_centered, assume_a="pos")


@register("Ridge")
class RidgeRegressor(BaseRegressor):
    """Ridge regression; the intercept is the (unpenalized) target mean."""

    def __init__(self, spec: EstimatorSpec):
        super().__init__(spec)
        self.coef_: np.ndarray = np.zeros(0)
        self.intercept_: float = 0.0
        self.stats_: Optional[FeatureStats] = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> TrainingMetadata:
        self.stats_ = fit_column_stats(X)
        Z = apply_column_stats(X, self.stats_)
        self.intercept_ = float(y.mean())
        self.coef_ = ridge_solve(Z, y - self.intercept_, self.spec.params.alpha)

        residual = y - self.predict(X)
        return TrainingMetadata(
            n_rows=int(X.shape[0]),
            iterations=1,
            training_loss=float(np.mean(residual**2)),
        )

    def predict(self, X: np.ndarray) -> np.ndarray:
        return apply_column_stats(X, self.stats_) @ self.coef_ + self.intercept_

    def get_state(self) -> Dict[str, Any]:
        return {
            "coef": self.coef_.tolist(),
            "intercept": self.intercept_,
            "stats": self.stats_.model_dump(),
        }

    @classmethod
    def from_state(cls, spec: EstimatorSpec, state: Dict[str, Any]) -> "RidgeRegressor":
        model = cls(spec)
        model.coef_ = np.asarray(state["coef"], dtype=np.float64)
        model.intercept_ = float(state["intercept"])
        model.stats_ = FeatureStats(**state["stats"])
        return model
