"""Tests for estimator documents."""

import numpy as np
import pytest

from app.models.estimator import (
    Activation,
    EstimatorSpec,
    GradientBoostingParams,
    MLPParams,
    RandomForestParams,
    RidgeParams,
)
from app.services.regressors import fit, predict
from app.services.serialization import (
    estimator_from_dict,
    estimator_to_dict,
    read_json,
    write_json,
)
from app.utils.errors import NotFoundError, SerializationError


@pytest.fixture(scope="module")
def rows():
    rng = np.random.default_rng(12)
    X = rng.normal(size=(150, 9))
    y = np.maximum(0.3 * X[:, 1] + 0.1 * np.tanh(X[:, 2]) + 0.4, 0.0)
    return X, y


@pytest.mark.parametrize(
    "params",
    [
        RidgeParams(alpha=0.3),
        MLPParams(activation=Activation.LOGISTIC, hidden_layer_sizes=[12, 10]),
        GradientBoostingParams(learning_rate=0.2, n_estimators=10, max_depth=3),
        RandomForestParams(n_estimators=10, max_depth=4),
    ],
    ids=lambda p: p.kind,
)
def test_reloaded_estimator_predicts_identically(params, rows, tmp_path):
    """Test that a written and re-read estimator gives bit-identical output."""
    X, y = rows
    est = fit(EstimatorSpec(params=params, seed=3), X, y)
    path = write_json(tmp_path / "est.json", estimator_to_dict(est))

    restored = estimator_from_dict(read_json(path))

    assert restored.spec == est.spec
    assert restored.metadata == est.metadata
    np.testing.assert_array_equal(predict(restored, X), predict(est, X))


def test_identical_estimators_write_identical_files(rows, tmp_path):
    """Test that documents are written deterministically."""
    X, y = rows
    spec = EstimatorSpec(params=RidgeParams())
    a = write_json(tmp_path / "a.json", estimator_to_dict(fit(spec, X, y)))
    b = write_json(tmp_path / "b.json", estimator_to_dict(fit(spec, X, y)))
    assert a.read_bytes() == b.read_bytes()


def test_foreign_format(rows):
    """Test that another format version is rejected."""
    X, y = rows
    doc = estimator_to_dict(fit(EstimatorSpec(params=RidgeParams()), X, y))
    doc["format_version"] = "someone-else/9"
    with pytest.raises(SerializationError):
        estimator_from_dict(doc)
    with pytest.raises(SerializationError):
        estimator_from_dict(["not", "a", "document"])


def test_malformed_document(rows):
    """Test that a document without parameters is rejected."""
    X, y = rows
    doc = estimator_to_dict(fit(EstimatorSpec(params=RidgeParams()), X, y))
    del doc["state"]
    with pytest.raises(SerializationError):
        estimator_from_dict(doc)


def test_read_json_errors(tmp_path):
    """Test missing and unparsable files."""
    with pytest.raises(NotFoundError):
        read_json(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(SerializationError):
        read_json(broken)
