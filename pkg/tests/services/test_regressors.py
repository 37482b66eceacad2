"""Tests for the from-scratch regressors."""

import time
import unittest

import numpy as np
import pytest

from app.core.constants import N_FEATURES, RF_MAX_FEATURES
from app.models.estimator import (
    Activation,
    EstimatorSpec,
    GradientBoostingParams,
    MLPParams,
    RandomForestParams,
    RidgeParams,
)
from app.services.features import apply_column_stats, fit_column_stats
from app.services.regressors import fit, predict
from app.services.regressors.mlp import init_layers, loss_and_gradients
from app.services.regressors.ridge import ridge_solve
from app.services.regressors.trees import MAX_BINS, bin_features, regression_tree_fit
from app.utils.errors import InsufficientDataError, InvalidDataError, ShapeError


def random_rows(n: int, seed: int = 0):
    """Feature-like rows whose second column plays the role of radiation."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, N_FEATURES))
    X[:, 1] = rng.uniform(0.0, 0.2, n)
    X[:, 0] = X[:, 1] ** 2
    return X


def smooth_target(X: np.ndarray) -> np.ndarray:
    return 3.0 * X[:, 1] + 0.5 * np.sin(X[:, 3]) + 0.1 * X[:, 4] ** 2


class TestRidge(unittest.TestCase):
    """Test cases for ridge regression."""

    def setUp(self):
        self.X = random_rows(2000)
        self.y = 2.0 * self.X[:, 1]
        self.spec = EstimatorSpec(params=RidgeParams(alpha=0.05))

    def test_linear_target_is_recovered(self):
        """Test training MSE on exactly linear data."""
        est = fit(self.spec, self.X, self.y)
        residual = self.y - predict(est, self.X)
        self.assertLessEqual(float(np.mean(residual**2)), 1e-6)
        self.assertLessEqual(est.metadata.training_loss, 1e-6)

    def test_normal_equations_hold(self):
        """Test that the coefficients solve the penalized normal equations."""
        Z = apply_column_stats(self.X, fit_column_stats(self.X))
        y_c = self.y - self.y.mean()
        beta = ridge_solve(Z, y_c, 0.05)
        lhs = Z.T @ (y_c - Z @ beta)
        scale = np.linalg.norm(Z.T @ y_c)
        np.testing.assert_allclose(lhs, 0.05 * beta, rtol=0.0, atol=1e-8 * scale)

    def test_larger_penalty_shrinks(self):
        """Test that a stronger penalty gives a smaller coefficient norm."""
        weak = fit(self.spec, self.X, self.y).model.coef_
        strong = fit(EstimatorSpec(params=RidgeParams(alpha=1.0)), self.X, self.y).model.coef_
        self.assertLess(np.linalg.norm(strong), np.linalg.norm(weak))


class TestMLP(unittest.TestCase):
    """Test cases for the multilayer perceptron."""

    def check_gradient(self, activation: str):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(10, 4))
        y = rng.normal(size=10)
        layers = init_layers([4, 5, 3, 1], activation, rng)
        _, grads = loss_and_gradients(layers, X, y, activation)

        h = 1e-5
        for layer_index, (W, b) in enumerate(layers):
            for param_index, param in enumerate((W, b)):
                analytic = grads[layer_index][param_index]
                for idx in np.ndindex(param.shape):
                    original = param[idx]
                    param[idx] = original + h
                    up, _ = loss_and_gradients(layers, X, y, activation)
                    param[idx] = original - h
                    down, _ = loss_and_gradients(layers, X, y, activation)
                    param[idx] = original
                    numeric = (up - down) / (2.0 * h)
                    self.assertLessEqual(
                        abs(numeric - analytic[idx]),
                        1e-4 * max(abs(numeric), abs(analytic[idx])) + 1e-7,
                        msg=f"layer {layer_index} param {param_index} {idx}",
                    )

    def test_gradient_tanh(self):
        """Test backpropagation against central differences with tanh."""
        self.check_gradient(Activation.TANH.value)

    def test_gradient_logistic(self):
        """Test backpropagation against central differences with logistic."""
        self.check_gradient(Activation.LOGISTIC.value)

    def test_gradient_relu(self):
        """Test backpropagation against central differences with relu."""
        self.check_gradient(Activation.RELU.value)

    def test_fit_learns_and_is_deterministic(self):
        """Test that training beats the constant predictor and repeats exactly."""
        X = random_rows(400, seed=2)
        y = smooth_target(X)
        spec = EstimatorSpec(
            params=MLPParams(activation=Activation.TANH, hidden_layer_sizes=[20]),
            seed=5,
        )
        first = fit(spec, X, y)
        second = fit(spec, X, y)

        self.assertLess(first.metadata.training_loss, float(np.var(y)))
        self.assertLessEqual(first.metadata.iterations, 300)
        np.testing.assert_array_equal(predict(first, X), predict(second, X))


class TestTrees(unittest.TestCase):
    """Test cases for regression trees and the tree ensembles."""

    def test_constant_target_gives_single_leaf(self):
        """Test that a constant target is not split."""
        X = random_rows(50)
        tree = regression_tree_fit(X, np.full(50, 0.5), max_depth=5)
        self.assertEqual(tree.node_count, 1)
        np.testing.assert_allclose(tree.predict(X), 0.5)

    def test_single_split(self):
        """Test the midpoint threshold of a separable four-point target."""
        X = np.array([[1.0], [2.0], [3.0], [4.0]])
        tree = regression_tree_fit(X, np.array([0.0, 0.0, 1.0, 1.0]), max_depth=1)
        self.assertEqual(tree.threshold[0], 2.5)
        np.testing.assert_array_equal(tree.predict(X), [0.0, 0.0, 1.0, 1.0])

    def test_bins_agree_with_thresholds(self):
        """Test that bin codes order rows exactly like the raw thresholds."""
        X = random_rows(2000, seed=4)
        X[:, 3] = np.round(X[:, 3])
        bins = bin_features(X, max_bins=32)
        for f, t in enumerate(bins.thresholds):
            self.assertLessEqual(t.shape[0], 31)
            self.assertTrue(np.all(np.diff(t) > 0))
            for k in range(t.shape[0]):
                np.testing.assert_array_equal(bins.codes[:, f] <= k, X[:, f] <= t[k])

    def test_many_distinct_values_use_quantiles(self):
        """Test quantile thresholds on a wide column and the fit quality they give."""
        X = random_rows(5000, seed=6)
        y = smooth_target(X)
        bins = bin_features(X)
        self.assertTrue(all(t.shape[0] <= MAX_BINS - 1 for t in bins.thresholds))
        tree = regression_tree_fit(X, y, max_depth=8, bins=bins)
        self.assertLess(np.mean((tree.predict(X) - y) ** 2), 0.2 * np.var(y))

    @pytest.mark.slow
    def test_deep_boosting_fit_time(self):
        """Test that 20 depth-10 stages on 20k rows fit within a few seconds."""
        X = random_rows(20000, seed=8)
        spec = EstimatorSpec(
            params=GradientBoostingParams(learning_rate=0.1, n_estimators=20, max_depth=10)
        )
        started = time.perf_counter()
        fit(spec, X, smooth_target(X))
        self.assertLess(time.perf_counter() - started, 5.0)

    def test_depth_is_limited(self):
        """Test that grown trees respect max_depth."""
        X = random_rows(300)
        tree = regression_tree_fit(X, smooth_target(X), max_depth=3)
        self.assertLessEqual(tree.depth(), 3)

    def test_boosting_losses_non_increasing(self):
        """Test that each boosting stage does not raise the training MSE."""
        for seed in (0, 1, 2):
            X = random_rows(200, seed=seed)
            y = smooth_target(X)
            spec = EstimatorSpec(
                params=GradientBoostingParams(learning_rate=0.3, n_estimators=25, max_depth=2)
            )
            losses = fit(spec, X, y).model.train_losses_
            self.assertTrue(
                all(b <= a + 1e-12 for a, b in zip(losses, losses[1:])),
                msg=f"seed {seed}",
            )

    def test_degenerate_boosting_equals_tree(self):
        """Test one full-rate stage against a directly grown tree."""
        X = random_rows(120)
        y = smooth_target(X)
        params = GradientBoostingParams.model_construct(
            kind="GradientBoosting", learning_rate=1.0, n_estimators=1, max_depth=10
        )
        est = fit(EstimatorSpec.model_construct(params=params, seed=0), X, y)
        tree = regression_tree_fit(X, y, max_depth=10)
        np.testing.assert_allclose(predict(est, X), tree.predict(X), atol=1e-10)

    def test_degenerate_forest_equals_tree(self):
        """Test a single unbagged tree against a directly grown tree."""
        X = random_rows(120)
        y = smooth_target(X)
        params = RandomForestParams.model_construct(
            kind="RandomForest", n_estimators=1, max_depth=10, bootstrap=False
        )
        est = fit(EstimatorSpec.model_construct(params=params, seed=3), X, y)
        tree = regression_tree_fit(
            X, y, 10, max_features=RF_MAX_FEATURES, rng=np.random.default_rng(3)
        )
        np.testing.assert_array_equal(predict(est, X), tree.predict(X))

    def test_forest_is_deterministic(self):
        """Test that the same seed gives the same forest."""
        X = random_rows(150)
        y = smooth_target(X)
        spec = EstimatorSpec(params=RandomForestParams(n_estimators=10, max_depth=4), seed=9)
        np.testing.assert_array_equal(
            predict(fit(spec, X, y), X), predict(fit(spec, X, y), X)
        )


@pytest.fixture
def ridge():
    return EstimatorSpec(params=RidgeParams())


def test_wrong_column_count(ridge):
    """Test that eight columns are rejected."""
    with pytest.raises(ShapeError):
        fit(ridge, np.zeros((30, N_FEATURES - 1)), np.zeros(30))


def test_row_count_mismatch(ridge):
    """Test that X and y must have the same rows."""
    with pytest.raises(ShapeError):
        fit(ridge, random_rows(30), np.zeros(29))


def test_too_few_rows(ridge):
    """Test that fewer than 20 rows cannot be fitted."""
    with pytest.raises(InsufficientDataError):
        fit(ridge, random_rows(19), np.zeros(19))


def test_non_finite_input(ridge):
    """Test that NaN inputs are rejected."""
    X = random_rows(30)
    X[4, 2] = np.nan
    with pytest.raises(InvalidDataError):
        fit(ridge, X, np.zeros(30))


def test_predict_empty(ridge):
    """Test prediction on zero rows."""
    est = fit(ridge, random_rows(30), np.ones(30))
    assert predict(est, np.zeros((0, N_FEATURES))).shape == (0,)
