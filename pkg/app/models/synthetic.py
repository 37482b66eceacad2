from datetime import date, datetime
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.constants import DEFAULT_LATITUDE, MAX_SUPPORTED_LATITUDE
from app.models.core import MountingConfig
from app.utils.date import ensure_utc
from app.utils.errors import DomainError, UnsupportedLatitudeError


class RoofSection(MountingConfig):
    """Mounting of one roof of a multi-roof plant and its share of p_n."""

    fraction: float = Field(..., gt=0.0, le=1.0)


class DipWindow(BaseModel):
    """
    Period ``[start, end)`` in which measured power is multiplied by
    ``factor``; 0 is a complete shutdown.
    """

    model_config = ConfigDict(frozen=True)

    start: datetime
    end: datetime
    factor: float = Field(..., ge=0.0, lt=1.0)

    @field_validator("start", "end", mode="before")
    def in_utc(cls, v):
        return ensure_utc(v)

    @model_validator(mode="after")
    def ordered(self) -> "DipWindow":
        if self.end <= self.start:
            raise DomainError(
                "Dip window must end after it starts",
                details={"start": self.start.isoformat(), "end": self.end.isoformat()},
            )
        return self


class SyntheticPlantConfig(BaseModel):
    """
    Ground truth of one synthetic plant.

    A plant is either a single roof (``inclination``/``azimuth``) or, when
    ``mixture`` is given, several roofs sharing p_n by fraction.

    Attributes:
        id: Plant identifier
        inclination: Tilt in degrees
        azimuth: Orientation in degrees, 180 = south
        p_n: Peak rating in kW
        latitude: Site latitude in degrees
        noise_std: Measurement noise std as a fraction of p_n
        mixture: Roof sections of a multi-roof plant
        dips: Measurement dips applied after generation
    """

    model_config = ConfigDict(frozen=True)

    id: str
    inclination: float = Field(30.0, ge=0.0, le=90.0)
    azimuth: float = Field(180.0, ge=0.0, lt=360.0)
    p_n: float = Field(10.0, gt=0.0)
    latitude: float = DEFAULT_LATITUDE
    noise_std: float = Field(0.02, ge=0.0)
    mixture: Optional[List[RoofSection]] = None
    dips: List[DipWindow] = Field(default_factory=list)

    @field_validator("latitude")
    def latitude_supported(cls, v: float) -> float:
        if abs(v) > MAX_SUPPORTED_LATITUDE:
            raise UnsupportedLatitudeError(
                "Polar latitudes are not supported", details={"latitude": v}
            )
        return v

    @field_validator("mixture")
    def fractions_sum_to_one(
        cls, v: Optional[List[RoofSection]]
    ) -> Optional[List[RoofSection]]:
        if v is not None:
            total = sum(section.fraction for section in v)
            if not v or abs(total - 1.0) > 1e-9:
                raise DomainError(
                    "Mixture fractions must sum to 1", details={"sum": total}
                )
        return v

    def sections(self) -> List[RoofSection]:
        """Roof sections, a single full-share section for one-roof plants."""
        if self.mixture:
            return list(self.mixture)
        return [
            RoofSection(
                inclination=self.inclination, azimuth=self.azimuth, fraction=1.0
            )
        ]

    @property
    def mounting(self) -> Optional[MountingConfig]:
        if self.mixture:
            return None
        return MountingConfig(inclination=self.inclination, azimuth=self.azimuth)


class FleetManifest(BaseModel):
    """What was generated, enough to regenerate the same fleet."""

    start: date
    days: int
    seed: int
    forecast_noise: float
    plants: List[SyntheticPlantConfig]
    files: List[str] = Field(default_factory=list)
