"""Run configuration for the AutoPV toolkit."""

import json
import os
from datetime import date
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from pydantic import BaseModel, Field, field_validator, model_validator

from app.core.constants import (
    CASH_VALIDATION_FRACTION,
    DEFAULT_CYCLE_DAYS,
    DEFAULT_LATITUDE,
    DEFAULT_MAX_TRIALS,
    DEFAULT_WINDOW_SAMPLES,
    MAX_SUPPORTED_LATITUDE,
    PLATEAU_PATIENCE,
    PLATEAU_STD_THRESHOLD,
    PLATEAU_TOP_K,
)
from app.models.estimator import EstimatorKind
from app.utils.errors import ConfigError
from app.utils.logging import get_logger
from app.utils.validation import validate_model

logger = get_logger("config")

ENV_PREFIX = "AUTOPV_"


class PathsConfig(BaseModel):
    """Output and input directories."""

    data_dir: Path = Field(Path("data"), description="Fleet CSVs and manifest")
    model_dir: Path = Field(Path("models"), description="Plant model bundles")
    report_dir: Path = Field(Path("reports"), description="Reports and plot data")


class AdaptationConfig(BaseModel):
    """Weight adaptation schedule."""

    cycle_days: int = Field(DEFAULT_CYCLE_DAYS, ge=1, description="Days between adaptations (C)")
    window_samples: int = Field(
        DEFAULT_WINDOW_SAMPLES, ge=1, description="Samples per optimization window (K)"
    )
    enabled: bool = Field(True, description="Adapt weights during simulation")
    pool_size: Optional[int] = Field(
        None, ge=2, description="Keep this many mutually diverse pool models per target"
    )
    own_model_after_days: Optional[int] = Field(
        None, ge=1, description="simulate: day on which the plant's own model joins the pool"
    )


class SeedConfig(BaseModel):
    fleet: int = Field(42, description="Synthetic fleet seed")
    run: int = Field(0, description="Search and training seed")


class FleetConfig(BaseModel):
    """Synthetic fleet generation."""

    start: date = Field(date(2018, 1, 1), description="First day (UTC)")
    days: int = Field(1096, ge=1, description="Number of days per series")
    latitude: float = Field(DEFAULT_LATITUDE, description="Site latitude in degrees")
    plant_count: int = Field(11, ge=3, le=11, description="Plants of the default fleet")
    noise_std: float = Field(0.02, ge=0.0, description="Measurement noise, fraction of p_n")
    forecast_noise: float = Field(0.1, ge=0.0, description="Relative radiation forecast noise")

    @field_validator("latitude")
    def latitude_supported(cls, v: float) -> float:
        if abs(v) > MAX_SUPPORTED_LATITUDE:
            raise ValueError(f"|latitude| must not exceed {MAX_SUPPORTED_LATITUDE}")
        return v


class SplitConfig(BaseModel):
    """Pretraining and test periods, counted in days from the fleet start."""

    pretrain_days: int = Field(731, ge=1)
    test_days: int = Field(365, ge=1)


class CashConfig(BaseModel):
    """Estimator search settings."""

    max_trials: int = Field(DEFAULT_MAX_TRIALS, ge=1)
    kinds: List[EstimatorKind] = Field(default_factory=lambda: list(EstimatorKind))
    patience: int = Field(PLATEAU_PATIENCE, ge=1)
    top_k: int = Field(PLATEAU_TOP_K, ge=1)
    std_threshold: float = Field(PLATEAU_STD_THRESHOLD, gt=0.0)
    validation_fraction: float = Field(CASH_VALIDATION_FRACTION, gt=0.0, lt=1.0)

    @field_validator("kinds")
    def kinds_not_empty(cls, v: List[EstimatorKind]) -> List[EstimatorKind]:
        if not v:
            raise ValueError("At least one estimator kind is required")
        return v


class MethodToggles(BaseModel):
    """Compared methods and the consistency run."""

    im_hda: bool = True
    im_it: bool = True
    averaging: bool = True
    autopv: bool = True
    consistency: bool = True


class LoggingConfig(BaseModel):
    log_level: str = Field("INFO", description="Log level")
    use_json: bool = Field(False, description="Emit JSON log records")
    log_to_file: bool = Field(False, description="Also write logs to a file")
    log_file_path: Optional[str] = Field(None, description="Log file path")

    @field_validator("log_level")
    def validate_level(cls, v: str) -> str:
        allowed = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in allowed:
            raise ValueError(f"Log level must be one of: {', '.join(allowed)}")
        return v.upper()


class AuditConfig(BaseModel):
    include_timings: bool = Field(False, description="Write trial wall times to logs")


class RunConfig(BaseModel):
    """
    Complete configuration of a generate/pretrain/simulate/evaluate run.

    Examples:
        >>> config = RunConfig()
        >>> config.adaptation.cycle_days
        28
    """

    paths: PathsConfig = Field(default_factory=PathsConfig)
    adaptation: AdaptationConfig = Field(default_factory=AdaptationConfig)
    seeds: SeedConfig = Field(default_factory=SeedConfig)
    fleet: FleetConfig = Field(default_factory=FleetConfig)
    split: SplitConfig = Field(default_factory=SplitConfig)
    cash: CashConfig = Field(default_factory=CashConfig)
    methods: MethodToggles = Field(default_factory=MethodToggles)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    audit: AuditConfig = Field(default_factory=AuditConfig)
    workers: int = Field(1, ge=1, description="Worker processes for folds and pretraining")

    @model_validator(mode="after")
    def check_consistency(self) -> "RunConfig":
        if self.adaptation.window_samples < self.fleet.plant_count:
            raise ValueError("window_samples must be at least the pool size")
        if self.split.pretrain_days + self.split.test_days > self.fleet.days:
            raise ValueError("pretrain_days + test_days exceed the fleet length")
        return self


def load_config_from_file(file_path: Union[str, Path]) -> Dict[str, Any]:
    """
    Load configuration from a YAML or JSON file.

    Args:
        file_path: Path to the configuration file

    Returns:
        Dict with configuration

    Raises:
        ConfigError: If the file is missing or cannot be parsed
    """
    file_path = Path(file_path)

    if not file_path.exists():
        raise ConfigError(f"Config file not found: {file_path}")

    logger.info("Loading configuration", path=str(file_path))

    if file_path.suffix.lower() not in [".yml", ".yaml", ".json"]:
        raise ConfigError(f"Unsupported config file format: {file_path.suffix}")
    try:
        with open(file_path, "r") as f:
            if file_path.suffix.lower() == ".json":
                data = json.load(f)
            else:
                data = yaml.safe_load(f)
    except Exception as e:
        raise ConfigError(f"Failed to load config file: {str(e)}")
    return data or {}


def load_config_from_env() -> Dict[str, Any]:
    """
    Load configuration overrides from ``AUTOPV_*`` environment variables.

    ``AUTOPV_<SECTION>__<FIELD>`` sets a nested field and
    ``AUTOPV_WORKERS`` a top-level one.

    Examples:
        >>> os.environ["AUTOPV_ADAPTATION__CYCLE_DAYS"] = "14"
        >>> load_config_from_env()["adaptation"]["cycle_days"]
        '14'
    """
    config: Dict[str, Any] = {}
    for key, value in os.environ.items():
        if not key.startswith(ENV_PREFIX):
            continue
        parts = key[len(ENV_PREFIX):].lower().split("__")
        target = config
        for part in parts[:-1]:
            target = target.setdefault(part, {})
        target[parts[-1]] = value
    return config


def _merge(base: Dict[str, Any], extra: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def build_run_config(data: Dict[str, Any]) -> RunConfig:
    """
    Validate a configuration dict.

    Raises:
        ConfigError: If validation fails
    """
    return validate_model(data, RunConfig)


def load_run_config(
    config_file: Optional[Union[str, Path]] = None,
    defaults: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """
    Load the run configuration: defaults, file values, then environment overrides.

    Args:
        config_file: Optional YAML or JSON file
        defaults: Base values below the file, e.g. from process settings

    Returns:
        RunConfig instance

    Raises:
        ConfigError: If the file cannot be read or the result is invalid
    """
    data = _merge(defaults or {}, load_config_from_file(config_file) if config_file else {})
    data = _merge(data, load_config_from_env())
    config = build_run_config(data)
    logger.debug("Configuration loaded", source=str(config_file or "defaults"))
    return config


def apply_overrides(config: RunConfig, overrides: Dict[str, Any]) -> RunConfig:
    """
    Return a new config with dotted-key overrides applied.

    ``None`` values are ignored, so unset CLI flags keep file values.

    Examples:
        >>> apply_overrides(RunConfig(), {"adaptation.cycle_days": 7}).adaptation.cycle_days
        7
    """
    data = config.model_dump(mode="json")
    for dotted, value in overrides.items():
        if value is None:
            continue
        target = data
        parts = dotted.split(".")
        for part in parts[:-1]:
            target = target.setdefault(part, {})
        target[parts[-1]] = value
    return build_run_config(data)


def resolve_paths(config: RunConfig) -> PathsConfig:
    """
    Create the configured directories.

    Raises:
        ConfigError: If a directory's parent does not exist
    """
    for name in ("data_dir", "model_dir", "report_dir"):
        path = Path(getattr(config.paths, name))
        if path.exists():
            continue
        if not path.parent.exists():
            raise ConfigError(
                f"Parent directory of {name} does not exist",
                details={"path": str(path)},
            )
        path.mkdir()
    return config.paths
