"""Tree ensembles: gradient boosting on residuals and bagged random forests."""

from typing import Any, Dict, List

import numpy as np

from app.core.constants import RF_MAX_FEATURES
from app.models.estimator import EstimatorSpec, TrainingMetadata
from app.services.regressors.base import BaseRegressor, register
from app.services.regressors.trees import RegressionTree, bin_features, regression_tree_fit


@register("GradientBoosting")
class GradientBoostingRegressor(BaseRegressor):
    """
    Least-squares boosting.

    Starts from the target mean and adds ``n_estimators`` depth-limited trees,
    each fit to the current residuals and shrunk by ``learning_rate``.

    Attributes:
        init_: Constant initial prediction
        trees_: Fitted stages in order
        train_losses_: Training MSE after each stage
    """

    def __init__(self, spec: EstimatorSpec):
        super().__init__(spec)
        self.init_: float = 0.0
        self.trees_: List[RegressionTree] = []
        self.train_losses_: List[float] = []

    def fit(self, X: np.ndarray, y: np.ndarray) -> TrainingMetadata:
        params = self.spec.params
        self.init_ = float(y.mean())
        self.trees_ = []
        self.train_losses_ = []

        bins = bin_features(X)
        current = np.full(y.shape[0], self.init_)
        for _ in range(params.n_estimators):
            tree = regression_tree_fit(X, y - current, params.max_depth, bins=bins)
            current = current + params.learning_rate * tree.predict(X)
            self.trees_.append(tree)
            self.train_losses_.append(float(np.mean((y - current) ** 2)))

        return TrainingMetadata(
            n_rows=int(X.shape[0]),
            iterations=len(self.trees_),
            training_loss=self.train_losses_[-1],
        )

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = np.full(X.shape[0], self.init_)
        for tree in self.trees_:
            out = out + self.spec.params.learning_rate * tree.predict(X)
        return out

    def get_state(self) -> Dict[str, Any]:
        return {
            "init": self.init_,
            "trees": [tree.get_state() for tree in self.trees_],
        }

    @classmethod
    def from_state(
        cls, spec: EstimatorSpec, state: Dict[str, Any]
    ) -> "GradientBoostingRegressor":
        model = cls(spec)
        model.init_ = float(state["init"])
        model.trees_ = [RegressionTree.from_state(t) for t in state["trees"]]
        return model


@register("RandomForest")
class RandomForestRegressor(BaseRegressor):
    """
    Mean of ``n_estimators`` trees, each grown on a bootstrap sample with
    ``RF_MAX_FEATURES`` candidate features per split.
    """

    def __init__(self, spec: EstimatorSpec):
        super().__init__(spec)
        self.trees_: List[RegressionTree] = []

    def fit(self, X: np.ndarray, y: np.ndarray) -> TrainingMetadata:
        params = self.spec.params
        rng = np.random.default_rng(self.spec.seed)
        n = X.shape[0]
        bins = bin_features(X)
        self.trees_ = []
        for _ in range(params.n_estimators):
            rows = rng.integers(0, n, size=n) if params.bootstrap else np.arange(n)
            self.trees_.append(
                regression_tree_fit(
                    X[rows],
                    y[rows],
                    params.max_depth,
                    max_features=RF_MAX_FEATURES,
                    rng=rng,
                    bins=bins.take(rows),
                )
            )

        residual = y - self.predict(X)
        return TrainingMetadata(
            n_rows=int(n),
            iterations=len(self.trees_),
            training_loss=float(np.mean(residual**2)),
        )

    def predict(self, X: np.ndarray) -> np.ndarray:
        total = np.zeros(X.shape[0])
        for tree in self.trees_:
            total = total + tree.predict(X)
        return total / len(self.trees_)

    def get_state(self) -> Dict[str, Any]:
        return {"trees": [tree.get_state() for tree in self.trees_]}

    @classmethod
    def from_state(
        cls, spec: EstimatorSpec, state: Dict[str, Any]
    ) -> "RandomForestRegressor":
        model = cls(spec)
        model.trees_ = [RegressionTree.from_state(t) for t in state["trees"]]
        return model
