"""Multilayer perceptron trained with Adam on squared error."""

from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.special import expit

from app.core.constants import (
    MLP_BATCH_SIZE,
    MLP_BETA_1,
    MLP_BETA_2,
    MLP_EPSILON,
    MLP_LEARNING_RATE,
    MLP_MAX_EPOCHS,
    MLP_N_ITER_NO_CHANGE,
    MLP_TOL,
    MLP_VALIDATION_FRACTION,
)
from app.models.core import FeatureStats
from app.models.estimator import Activation, EstimatorSpec, TrainingMetadata
from app.services.features import apply_column_stats, fit_column_stats
from app.services.regressors.base import BaseRegressor, register

Layer = Tuple[np.ndarray, np.ndarray]


def _relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


# Each entry: activation, derivative expressed through the activation output.
ACTIVATIONS: Dict[str, Tuple[Callable, Callable]] = {
    Activation.LOGISTIC.value: (expit, lambda a: a * (1.0 - a)),
    Activation.TANH.value: (np.tanh, lambda a: 1.0 - a * a),
    Activation.RELU.value: (_relu, lambda a: (a > 0.0).astype(np.float64)),
}


def init_layers(
    sizes: List[int], activation: str, rng: np.random.Generator
) -> List[Layer]:
    """Glorot-uniform weights and biases per layer."""
    layers: List[Layer] = []
    factor = 2.0 if activation == Activation.LOGISTIC.value else 6.0
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(factor / (fan_in + fan_out))
        W = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        b = rng.uniform(-bound, bound, size=fan_out)
        layers.append((W, b))
    return layers


def forward(
    layers: List[Layer], X: np.ndarray, activation: str
) -> List[np.ndarray]:
    """Activations of every layer, input first; the output layer is linear."""
    act, _ = ACTIVATIONS[activation]
    outputs = [X]
    for i, (W, b) in enumerate(layers):
        z = outputs[-1] @ W + b
        outputs.append(z if i == len(layers) - 1 else act(z))
    return outputs


def loss_and_gradients(
    layers: List[Layer], X: np.ndarray, y: np.ndarray, activation: str
) -> Tuple[float, List[Layer]]:
    """
    Half mean squared error and its gradient by backpropagation.

    Args:
        layers: (W, b) per layer
        X: Input rows
        y: Targets
        activation: Hidden-layer activation name

    Returns:
        Tuple (loss, [(dW, db) per layer])
    """
    _, derivative = ACTIVATIONS[activation]
    outputs = forward(layers, X, activation)
    n = X.shape[0]
    residual = outputs[-1][:, 0] - y
    loss = 0.5 * float(np.dot(residual, residual)) / n

    grads: List[Layer] = [None] * len(layers)  # type: ignore[list-item]
    delta = residual[:, None] / n
    for i in range(len(layers) - 1, -1, -1):
        W, _ = layers[i]
        grads[i] = (outputs[i].T @ delta, delta.sum(axis=0))
        if i > 0:
            delta = (delta @ W.T) * derivative(outputs[i])
    return loss, grads


class AdamState:
    """First and second moment estimates per parameter array."""

    def __init__(self, layers: List[Layer]):
        self.t = 0
        self.m = [np.zeros_like(p) for layer in layers for p in layer]
        self.v = [np.zeros_like(p) for layer in layers for p in layer]

    def step(self, layers: List[Layer], grads: List[Layer]) -> List[Layer]:
        self.t += 1
        lr = (
            MLP_LEARNING_RATE
            * np.sqrt(1.0 - MLP_BETA_2**self.t)
            / (1.0 - MLP_BETA_1**self.t)
        )
        params = [p for layer in layers for p in layer]
        flat_grads = [g for layer in grads for g in layer]
        updated = []
        for k, (p, g) in enumerate(zip(params, flat_grads)):
            self.m[k] = MLP_BETA_1 * self.m[k] + (1.0 - MLP_BETA_1) * g
            self.v[k] = MLP_BETA_2 * self.v[k] + (1.0 - MLP_BETA_2) * g * g
            updated.append(p - lr * self.m[k] / (np.sqrt(self.v[k]) + MLP_EPSILON))
        return [(updated[2 * i], updated[2 * i + 1]) for i in range(len(layers))]


@register("MLP")
class MLPRegressor(BaseRegressor):
    """
    Fully connected network with one linear output unit.

    Inputs are standardized with stats fitted on the training rows and
    stored with the weights. Training runs mini-batch Adam for at most
    ``MLP_MAX_EPOCHS`` epochs and stops early once the loss on the last
    tenth of the rows stalls; the best weights seen are kept.
    """

    def __init__(self, spec: EstimatorSpec):
        super().__init__(spec)
        self.layers_: List[Layer] = []
        self.stats_: Optional[FeatureStats] = None

    @property
    def activation(self) -> str:
        return self.spec.params.activation.value

    def fit(self, X: np.ndarray, y: np.ndarray) -> TrainingMetadata:
        rng = np.random.default_rng(self.spec.seed)
        self.stats_ = fit_column_stats(X)
        Z = apply_column_stats(X, self.stats_)

        n_val = int(Z.shape[0] * MLP_VALIDATION_FRACTION)
        if n_val > 0:
            Z_train, y_train = Z[:-n_val], y[:-n_val]
            Z_val, y_val = Z[-n_val:], y[-n_val:]
        else:
            Z_train, y_train, Z_val, y_val = Z, y, None, None

        sizes = [Z.shape[1], *self.spec.params.hidden_layer_sizes, 1]
        layers = init_layers(sizes, self.activation, rng)
        adam = AdamState(layers)

        best_layers, best_score = layers, np.inf
        no_improvement = 0
        epochs = 0
        stopped_early = False
        n_train = Z_train.shape[0]
        for epoch in range(MLP_MAX_EPOCHS):
            epochs = epoch + 1
            order = rng.permutation(n_train)
            for begin in range(0, n_train, MLP_BATCH_SIZE):
                batch = order[begin : begin + MLP_BATCH_SIZE]
                _, grads = loss_and_gradients(
                    layers, Z_train[batch], y_train[batch], self.activation
                )
                layers = adam.step(layers, grads)

            if Z_val is None:
                score = self._loss(layers, Z_train, y_train)
            else:
                score = self._loss(layers, Z_val, y_val)

            if score < best_score - MLP_TOL:
                no_improvement = 0
            else:
                no_improvement += 1
            if score < best_score:
                best_score, best_layers = score, layers
            if no_improvement >= MLP_N_ITER_NO_CHANGE:
                stopped_early = True
                break

        self.layers_ = best_layers
        residual = y - self.predict(X)
        return TrainingMetadata(
            n_rows=int(X.shape[0]),
            iterations=epochs,
            training_loss=float(np.mean(residual**2)),
            stopped_early=stopped_early,
        )

    def _loss(self, layers: List[Layer], Z: np.ndarray, y: np.ndarray) -> float:
        out = forward(layers, Z, self.activation)[-1][:, 0]
        return float(np.mean((out - y) ** 2))

    def predict(self, X: np.ndarray) -> np.ndarray:
        Z = apply_column_stats(X, self.stats_)
        return forward(self.layers_, Z, self.activation)[-1][:, 0]

    def get_state(self) -> Dict[str, Any]:
        return {
            "layers": [
                {"W": W.tolist(), "b": b.tolist()} for W, b in self.layers_
            ],
            "stats": self.stats_.model_dump(),
        }

    @classmethod
    def from_state(cls, spec: EstimatorSpec, state: Dict[str, Any]) -> "MLPRegressor":
        model = cls(spec)
        model.layers_ = [
            (np.asarray(layer["W"], dtype=np.float64), np.asarray(layer["b"], dtype=np.float64))
            for layer in state["layers"]
        ]
        model.stats_ = FeatureStats(**state["stats"])
        return model
