"""Versioned JSON documents for fitted estimators."""

import json
from pathlib import Path
from typing import Any, Dict, Union

from pydantic import ValidationError

from app.core.constants import ESTIMATOR_FORMAT_VERSION
from app.models.estimator import EstimatorSpec, TrainedEstimator, TrainingMetadata
from app.services.regressors import regressor_class
from app.utils.errors import NotFoundError, SerializationError


def check_format(doc: Dict[str, Any], expected: str) -> None:
    """
    Reject documents written in another format or version.

    Raises:
        SerializationError: On a missing or different ``format_version``
    """
    found = doc.get("format_version") if isinstance(doc, dict) else None
    if found != expected:
        raise SerializationError(
            "Unsupported document format",
            details={"expected": expected, "found": found},
        )


def estimator_to_dict(est: TrainedEstimator) -> Dict[str, Any]:
    """
    Self-describing document of a fitted estimator.

    Floats are written with their shortest round-trip repr, so loading the
    document restores bit-identical parameters.
    """
    return {
        "format_version": ESTIMATOR_FORMAT_VERSION,
        "spec": est.spec.model_dump(mode="json"),
        "metadata": est.metadata.model_dump(mode="json"),
        "state": est.model.get_state(),
    }


def estimator_from_dict(doc: Dict[str, Any]) -> TrainedEstimator:
    """
    Rebuild a fitted estimator from :func:`estimator_to_dict` output.

    Raises:
        SerializationError: On a foreign format or a malformed document
    """
    check_format(doc, ESTIMATOR_FORMAT_VERSION)
    try:
        spec = EstimatorSpec.model_validate(doc["spec"])
        metadata = TrainingMetadata.model_validate(doc["metadata"])
        model = regressor_class(spec.kind.value).from_state(spec, doc["state"])
    except (KeyError, TypeError, ValidationError) as e:
        raise SerializationError(
            "Malformed estimator document", details={"reason": str(e)}
        )
    return TrainedEstimator(spec=spec, model=model, metadata=metadata)


def write_json(
    path: Union[str, Path], doc: Dict[str, Any], sort_keys: bool = True
) -> Path:
    """
    Write a document, by default with sorted keys. Unsorted documents keep
    the insertion order of their dicts.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(doc, f, sort_keys=sort_keys, allow_nan=False)
        f.write("\n")
    return path


def read_json(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read a JSON document.

    Raises:
        NotFoundError: If the file does not exist
        SerializationError: If the file is not valid JSON
    """
    path = Path(path)
    if not path.exists():
        raise NotFoundError("Document", str(path))
    try:
        with open(path, "r") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise SerializationError(
            "Document is not valid JSON", details={"path": str(path), "reason": str(e)}
        )
