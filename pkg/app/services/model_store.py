import os
from pathlib import Path
from typing import Any, Dict, List, Union

from pydantic import ValidationError

from app.core.constants import PLANT_MODEL_FORMAT_VERSION
from app.models.core import FeatureStats
from app.models.plant import DataProvenance, TrainedPlantModel
from app.services.cash import write_trial_log
from app.services.serialization import (
    check_format,
    estimator_from_dict,
    estimator_to_dict,
    read_json,
    write_json,
)
from app.utils.errors import NotFoundError, SerializationError
from app.utils.logging import get_logger

logger = get_logger("model_store")

BUNDLE_SUFFIX = ".model.json"
TRIAL_LOG_SUFFIX = ".trials.jsonl"


def plant_model_to_dict(model: TrainedPlantModel) -> Dict[str, Any]:
    """Versioned bundle: estimator, feature stats, p_n and provenance."""
    return {
        "format_version": PLANT_MODEL_FORMAT_VERSION,
        "plant_id": model.plant_id,
        "p_n": model.p_n,
        "feature_stats": model.feature_stats.model_dump(mode="json"),
        "provenance": model.provenance.model_dump(mode="json"),
        "estimator": estimator_to_dict(model.estimator),
    }


def plant_model_from_dict(doc: Dict[str, Any]) -> TrainedPlantModel:
    """
    Raises:
        SerializationError: On a foreign format or a malformed bundle
    """
    check_format(doc, PLANT_MODEL_FORMAT_VERSION)
    try:
        return TrainedPlantModel(
            plant_id=doc["plant_id"],
            p_n=doc["p_n"],
            feature_stats=FeatureStats.model_validate(doc["feature_stats"]),
            provenance=DataProvenance.model_validate(doc["provenance"]),
            estimator=estimator_from_dict(doc["estimator"]),
        )
    except (KeyError, ValidationError) as e:
        raise SerializationError(
            "Malformed plant model bundle", details={"reason": str(e)}
        )


class ModelStore:
    """One bundle file (and CASH trial log) per plant under a directory."""

    def __init__(self, directory: Union[str, Path], include_timings: bool = False):
        self.directory = Path(directory)
        self.include_timings = include_timings
        self._ensure_dir_exists()

    def _ensure_dir_exists(self):
        os.makedirs(self.directory, exist_ok=True)

    def bundle_path(self, plant_id: str) -> Path:
        return self.directory / f"{plant_id}{BUNDLE_SUFFIX}"

    def trial_log_path(self, plant_id: str) -> Path:
        return self.directory / f"{plant_id}{TRIAL_LOG_SUFFIX}"

    def save(self, model: TrainedPlantModel) -> Path:
        """Write the bundle and, when the model came from a search, its trial log."""
        path = write_json(self.bundle_path(model.plant_id), plant_model_to_dict(model))
        if model.search is not None:
            write_trial_log(
                self.trial_log_path(model.plant_id), model.search, self.include_timings
            )
        logger.debug("Plant model saved", plant_id=model.plant_id, path=str(path))
        return path

    def load(self, plant_id: str) -> TrainedPlantModel:
        """
        Raises:
            NotFoundError: If no bundle exists for the plant
        """
        path = self.bundle_path(plant_id)
        if not path.exists():
            raise NotFoundError("Model bundle", plant_id)
        return plant_model_from_dict(read_json(path))

    def load_many(self, plant_ids: List[str]) -> List[TrainedPlantModel]:
        return [self.load(plant_id) for plant_id in plant_ids]

    def plant_ids(self) -> List[str]:
        return sorted(
            p.name[: -len(BUNDLE_SUFFIX)] for p in self.directory.glob(f"*{BUNDLE_SUFFIX}")
        )
