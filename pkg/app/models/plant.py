from datetime import datetime
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from app.models.core import FeatureStats
from app.models.estimator import SearchState, TrainedEstimator


class DataProvenance(BaseModel):
    """
    Time range of the measurements a model was trained on, and a digest of
    the training record when it is known.
    """

    model_config = ConfigDict(frozen=True)

    start: datetime
    end: datetime
    data_digest: Optional[str] = None

    def overlaps(self, start: datetime, end: datetime) -> bool:
        return self.start < end and start < self.end


class TrainedPlantModel(BaseModel):
    """
    Fitted pipeline of one plant, mapping weather forecasts to scaled power.

    Attributes:
        plant_id: Plant the model was trained on
        p_n: Peak rating of that plant (kW)
        estimator: Fitted estimator
        feature_stats: Daytime column stats of the training features
        provenance: Period of the training data
        search: CASH trial log, when the estimator came from a search
    """

    model_config = ConfigDict(frozen=True)

    plant_id: str
    p_n: float = Field(..., gt=0.0)
    estimator: TrainedEstimator
    feature_stats: FeatureStats
    provenance: DataProvenance
    search: Optional[SearchState] = None
