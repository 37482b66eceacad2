"""
Synthetic PV fleet with known mounting configurations.

All plants of a fleet share one region: the same cloud cover and air
temperature, and the same day-ahead weather forecast. Each plant converts
clear-sky irradiance on its own panel plane into power. Sun geometry uses
the declination/hour-angle approximation with UTC as solar time.
"""

from datetime import date, datetime, time, timedelta, timezone
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import yaml
from scipy.signal import lfilter

from app.core.constants import (
    ATMOSPHERIC_EXPONENT,
    CLEAR_SKY_IRRADIANCE,
    CLOUD_FACTOR_RANGE,
    DEFAULT_LATITUDE,
    DEFAULT_STEP,
    FORECAST_SMOOTHING_SAMPLES,
    MAX_SUPPORTED_LATITUDE,
    POWER_CEILING,
    REFERENCE_TEMPERATURE,
    TEMPERATURE_COEFFICIENT,
)
from app.models.core import PlantRecord, TimeSeries, WeatherForecast
from app.models.synthetic import (
    DipWindow,
    FleetManifest,
    RoofSection,
    SyntheticPlantConfig,
)
from app.utils.date import ensure_utc, samples_per_day
from app.utils.errors import DomainError, NotFoundError, UnsupportedLatitudeError
from app.utils.logging import get_logger

logger = get_logger("synthetic")

# Regional weather process parameters
CLOUD_MEAN = 0.7
CLOUD_PERSISTENCE = 0.97
CLOUD_INNOVATION_STD = 0.06
TEMPERATURE_MEAN = 10.0
TEMPERATURE_SEASONAL_AMPLITUDE = 9.0
TEMPERATURE_DIURNAL_AMPLITUDE = 4.0
TEMPERATURE_NOISE_STD = 1.0
TEMPERATURE_FORECAST_NOISE_STD = 0.5

MANIFEST_FILE = "fleet_manifest.yaml"


def _check_latitude(latitude: float) -> None:
    if abs(latitude) > MAX_SUPPORTED_LATITUDE:
        raise UnsupportedLatitudeError(
            "Polar latitudes are not supported", details={"latitude": latitude}
        )


def solar_geometry(
    latitude: float, times: pd.DatetimeIndex
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Sun elevation and azimuth (degrees) for many instants.

    Azimuth is measured clockwise from north; 180 is south.

    Raises:
        UnsupportedLatitudeError: If |latitude| > 66.5
    """
    _check_latitude(latitude)
    doy = times.dayofyear.to_numpy()
    solar_hour = (times.hour + times.minute / 60.0 + times.second / 3600.0).to_numpy()

    decl = np.radians(23.45 * np.sin(np.radians(360.0 / 365.0 * (284 + doy))))
    hour_angle = np.radians(15.0 * (solar_hour - 12.0))
    lat = np.radians(latitude)

    sin_el = np.sin(lat) * np.sin(decl) + np.cos(lat) * np.cos(decl) * np.cos(hour_angle)
    elevation = np.arcsin(np.clip(sin_el, -1.0, 1.0))

    cos_az = (np.sin(decl) - np.sin(elevation) * np.sin(lat)) / np.maximum(
        np.cos(elevation) * np.cos(lat), 1e-12
    )
    az = np.degrees(np.arccos(np.clip(cos_az, -1.0, 1.0)))
    azimuth = np.where(hour_angle < 0, az, 360.0 - az) % 360.0
    return np.degrees(elevation), azimuth


def solar_position(latitude: float, timestamp: Union[datetime, str]) -> Tuple[float, float]:
    """
    Sun elevation and azimuth in degrees; elevation <= 0 means below horizon.

    Examples:
        >>> el, az = solar_position(49.0, "2020-03-20T12:00:00Z")
        >>> 40.0 < el < 42.0
        True
    """
    times = pd.DatetimeIndex([ensure_utc(timestamp)])
    elevation, azimuth = solar_geometry(latitude, times)
    return float(elevation[0]), float(azimuth[0])


def clear_sky(elevation: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Horizontal and beam-normal clear-sky irradiance (W/m2).

    Both are zero with the sun below the horizon; the beam component is
    chosen so that beam times sin(elevation) gives the horizontal value.
    """
    sin_el = np.maximum(np.sin(np.radians(elevation)), 0.0)
    ghi = CLEAR_SKY_IRRADIANCE * sin_el**ATMOSPHERIC_EXPONENT
    dni = CLEAR_SKY_IRRADIANCE * sin_el ** (ATMOSPHERIC_EXPONENT - 1.0)
    dni = np.where(sin_el > 0.0, dni, 0.0)
    return ghi, dni


def plane_of_array(
    dni: np.ndarray,
    elevation: np.ndarray,
    sun_azimuth: np.ndarray,
    inclination: float,
    azimuth: float,
) -> np.ndarray:
    """Beam irradiance on a tilted plane, zero when the sun is behind it."""
    el = np.radians(elevation)
    tilt = np.radians(inclination)
    cos_incidence = np.sin(el) * np.cos(tilt) + np.cos(el) * np.sin(tilt) * np.cos(
        np.radians(sun_azimuth - azimuth)
    )
    return dni * np.maximum(cos_incidence, 0.0)


def cloud_factor(n: int, rng: np.random.Generator) -> np.ndarray:
    """Bounded AR(1) cloud attenuation in ``CLOUD_FACTOR_RANGE``."""
    innovations = CLOUD_INNOVATION_STD * rng.standard_normal(n)
    process = CLOUD_MEAN + lfilter([1.0], [1.0, -CLOUD_PERSISTENCE], innovations)
    return np.clip(process, *CLOUD_FACTOR_RANGE)


def air_temperature(times: pd.DatetimeIndex, rng: np.random.Generator) -> np.ndarray:
    """Seasonal plus diurnal sinusoids plus noise (degC), warmest in July afternoons."""
    doy = times.dayofyear.to_numpy()
    hour = (times.hour + times.minute / 60.0).to_numpy()
    seasonal = TEMPERATURE_SEASONAL_AMPLITUDE * np.sin(2.0 * np.pi * (doy - 110) / 365.25)
    diurnal = TEMPERATURE_DIURNAL_AMPLITUDE * np.sin(2.0 * np.pi * (hour - 9.0) / 24.0)
    noise = TEMPERATURE_NOISE_STD * rng.standard_normal(len(times))
    return TEMPERATURE_MEAN + seasonal + diurnal + noise


class RegionalWeather:
    """Shared weather truth and forecast of a fleet region."""

    def __init__(
        self,
        start: datetime,
        n_samples: int,
        step: timedelta,
        seed: int,
        forecast_noise: float,
        latitude: float = DEFAULT_LATITUDE,
    ):
        self.start = start
        self.step = step
        self.times = pd.date_range(start=start, periods=n_samples, freq=step)
        # Geometry at interval midpoints, matching mean power per interval.
        self.midpoints = self.times + step / 2
        rng = np.random.default_rng(seed)
        self.cloud = cloud_factor(n_samples, rng)
        self.temperature = air_temperature(self.midpoints, rng)
        self._geometry: Dict[float, Tuple[np.ndarray, np.ndarray]] = {}

        elevation, _ = self.geometry(latitude)
        ghi, _ = clear_sky(elevation)
        actual = ghi * self.cloud
        # Direct window sums keep windows of zeros exactly zero.
        kernel = np.full(FORECAST_SMOOTHING_SAMPLES, 1.0 / FORECAST_SMOOTHING_SAMPLES)
        smoothed = np.convolve(actual, kernel, mode="same")
        g_noise = 1.0 + forecast_noise * rng.standard_normal(n_samples)
        self.g_hat = np.maximum(smoothed * g_noise, 0.0)
        self.t_hat = self.temperature + TEMPERATURE_FORECAST_NOISE_STD * rng.standard_normal(
            n_samples
        )

    def geometry(self, latitude: float) -> Tuple[np.ndarray, np.ndarray]:
        if latitude not in self._geometry:
            self._geometry[latitude] = solar_geometry(latitude, self.midpoints)
        return self._geometry[latitude]

    def forecast(self) -> WeatherForecast:
        return WeatherForecast(
            g_hat=TimeSeries(start=self.start, step=self.step, values=self.g_hat),
            t_hat=TimeSeries(start=self.start, step=self.step, values=self.t_hat),
        )


def plant_power(
    config: SyntheticPlantConfig, weather: RegionalWeather, rng: np.random.Generator
) -> np.ndarray:
    """
    Mean power (kW) of one plant per sample.

    Plane-of-array fraction of every roof, weighted by its share, times cloud
    attenuation and temperature derating, plus daylight measurement noise,
    clipped to ``[0, POWER_CEILING * p_n]``.
    """
    elevation, sun_azimuth = weather.geometry(config.latitude)
    _, dni = clear_sky(elevation)

    poa_fraction = np.zeros(len(elevation))
    for section in config.sections():
        poa = plane_of_array(dni, elevation, sun_azimuth, section.inclination, section.azimuth)
        poa_fraction = poa_fraction + section.fraction * poa / CLEAR_SKY_IRRADIANCE

    derate = 1.0 - TEMPERATURE_COEFFICIENT * np.maximum(
        weather.temperature - REFERENCE_TEMPERATURE, 0.0
    )
    power = config.p_n * poa_fraction * weather.cloud * derate

    noise = config.noise_std * config.p_n * rng.standard_normal(len(power))
    power = power + np.where(elevation > 0.0, noise, 0.0)
    return np.clip(power, 0.0, POWER_CEILING * config.p_n)


def inject_dips(rec: PlantRecord, dip_windows: Sequence[DipWindow]) -> PlantRecord:
    """
    Multiply measured power by each window's factor; weather is untouched.

    Windows reaching past the series are cut to it.

    Raises:
        DomainError: If windows overlap
    """
    ordered = sorted(dip_windows, key=lambda d: d.start)
    for first, second in zip(ordered, ordered[1:]):
        if second.start < first.end:
            raise DomainError(
                "Dip windows overlap",
                details={"first": first.start.isoformat(), "second": second.start.isoformat()},
            )

    power = rec.power.values.copy()
    stamps = rec.power.timestamps()
    for dip in ordered:
        inside = (stamps >= dip.start) & (stamps < dip.end)
        power[inside] = power[inside] * dip.factor
    return rec.model_copy(update={"power": rec.power.with_values(power)})


def generate_fleet(
    configs: Sequence[SyntheticPlantConfig],
    start: Union[date, datetime, str],
    days: int,
    seed: int,
    forecast_noise: float = 0.1,
    step: timedelta = DEFAULT_STEP,
) -> List[PlantRecord]:
    """
    Generate measurement and forecast series of a fleet.

    Args:
        configs: Plant ground truths; the first one's latitude sets the
            forecast location
        start: First day (UTC midnight)
        days: Number of days
        seed: Fleet seed; the same seed gives a bitwise-identical fleet
        forecast_noise: Relative noise of the radiation forecast
        step: Sampling period

    Returns:
        One PlantRecord per config, in order

    Raises:
        DomainError: If days < 1 or no config is given
    """
    if days < 1 or not configs:
        raise DomainError(
            "A fleet needs at least one plant and one day",
            details={"days": days, "plants": len(configs)},
        )
    if isinstance(start, date) and not isinstance(start, datetime):
        start = datetime.combine(start, time(0), tzinfo=timezone.utc)
    start = ensure_utc(start)

    n_samples = days * samples_per_day(step)
    weather = RegionalWeather(
        start, n_samples, step, seed, forecast_noise, latitude=configs[0].latitude
    )
    forecast = weather.forecast()

    records = []
    for index, config in enumerate(configs):
        rng = np.random.default_rng([seed, index + 1])
        power = plant_power(config, weather, rng)
        rec = PlantRecord(
            id=config.id,
            p_n=config.p_n,
            mounting=config.mounting,
            power=TimeSeries(start=start, step=step, values=power),
            weather_forecast=forecast,
        )
        if config.dips:
            rec = inject_dips(rec, config.dips)
        records.append(rec)

    logger.info("Fleet generated", plants=len(records), days=days, seed=seed)
    return records


# (inclination, azimuth, p_n) of the single-roof default plants
DEFAULT_ROOFS: List[Tuple[float, float, float]] = [
    (30.0, 180.0, 9.8),
    (15.0, 200.0, 5.0),
    (45.0, 160.0, 12.5),
    (30.0, 90.0, 7.2),
    (30.0, 270.0, 30.0),
    (20.0, 135.0, 4.4),
    (20.0, 225.0, 15.0),
    (60.0, 180.0, 8.0),
    (10.0, 110.0, 22.0),
]


def default_dips(test_start: datetime) -> List[DipWindow]:
    """A two-week shutdown in May and dips in September and October."""

    def window(offset: int, length: int, factor: float) -> DipWindow:
        begin = test_start + timedelta(days=offset)
        return DipWindow(start=begin, end=begin + timedelta(days=length), factor=factor)

    return [
        window(130, 14, 0.0),
        window(247, 8, 0.3),
        window(274, 8, 0.5),
    ]


def default_fleet_configs(
    test_start: Union[date, datetime],
    latitude: float = DEFAULT_LATITUDE,
    noise_std: float = 0.02,
    plant_count: int = 11,
) -> List[SyntheticPlantConfig]:
    """
    The default fleet: nine single-roof plants with diverse mountings, one
    east-west two-roof plant and one plant with dips in its test year.

    Args:
        test_start: First day of the test period (dips are placed in it)
        latitude: Site latitude
        noise_std: Measurement noise, fraction of p_n
        plant_count: Keep the first ``plant_count`` plants (3..11)
    """
    if isinstance(test_start, date) and not isinstance(test_start, datetime):
        test_start = datetime.combine(test_start, time(0), tzinfo=timezone.utc)
    test_start = ensure_utc(test_start)

    configs = [
        SyntheticPlantConfig(
            id=f"plant_{i + 1:02d}",
            inclination=inclination,
            azimuth=azimuth,
            p_n=p_n,
            latitude=latitude,
            noise_std=noise_std,
        )
        for i, (inclination, azimuth, p_n) in enumerate(DEFAULT_ROOFS)
    ]
    configs.append(
        SyntheticPlantConfig(
            id="plant_10",
            p_n=10.0,
            latitude=latitude,
            noise_std=noise_std,
            mixture=[
                RoofSection(inclination=25.0, azimuth=90.0, fraction=0.5),
                RoofSection(inclination=25.0, azimuth=270.0, fraction=0.5),
            ],
        )
    )
    configs.append(
        SyntheticPlantConfig(
            id="plant_11",
            inclination=35.0,
            azimuth=170.0,
            p_n=6.5,
            latitude=latitude,
            noise_std=noise_std,
            dips=default_dips(test_start),
        )
    )
    return configs[:plant_count]


def write_manifest(manifest: FleetManifest, directory: Union[str, Path]) -> Path:
    path = Path(directory) / MANIFEST_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        yaml.safe_dump(manifest.model_dump(mode="json"), f, sort_keys=True)
    return path


def read_manifest(directory: Union[str, Path]) -> FleetManifest:
    """
    Raises:
        NotFoundError: If the directory holds no manifest
    """
    path = Path(directory) / MANIFEST_FILE
    if not path.exists():
        raise NotFoundError("Fleet manifest", str(path))
    with open(path, "r") as f:
        return FleetManifest.model_validate(yaml.safe_load(f))


def plant_file_name(plant_id: str) -> str:
    return f"{plant_id}.csv"
