from app.models.core import (
    FeatureMatrix,
    FeatureStats,
    MountingConfig,
    PlantRecord,
    TimeSeries,
    WeatherForecast,
)
from app.models.ensemble import (
    AdaptationStatus,
    EnsembleState,
    WeightLogEntry,
    WeightVector,
)
from app.models.estimator import (
    EstimatorKind,
    EstimatorSpec,
    SearchState,
    TrainedEstimator,
    TrialRecord,
)
from app.models.evaluation import (
    ConsistencyReport,
    EvaluationReport,
    PlantScores,
    RunMetadata,
    SeasonalWeights,
    SimulationResult,
)
from app.models.plant import DataProvenance, TrainedPlantModel
from app.models.synthetic import (
    DipWindow,
    FleetManifest,
    RoofSection,
    SyntheticPlantConfig,
)

__all__ = [
    # Series and records
    "TimeSeries",
    "WeatherForecast",
    "MountingConfig",
    "PlantRecord",
    "FeatureStats",
    "FeatureMatrix",
    # Estimators
    "EstimatorKind",
    "EstimatorSpec",
    "TrainedEstimator",
    "TrialRecord",
    "SearchState",
    # Plant models
    "DataProvenance",
    "TrainedPlantModel",
    # Ensemble
    "WeightVector",
    "AdaptationStatus",
    "EnsembleState",
    "WeightLogEntry",
    # Evaluation
    "SimulationResult",
    "PlantScores",
    "RunMetadata",
    "EvaluationReport",
    "SeasonalWeights",
    "ConsistencyReport",
    # Synthetic fleet
    "RoofSection",
    "DipWindow",
    "SyntheticPlantConfig",
    "FleetManifest",
]
