"""
Command implementations behind the ``generate``, ``pretrain``, ``simulate``,
``evaluate`` and ``report`` verbs.

Every command takes a validated RunConfig, reads and writes only below the
configured directories and returns the paths (or text) it produced.
"""

from datetime import datetime, time, timedelta, timezone
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

from app.core.constants import (
    METHOD_AUTOPV,
    METHOD_AVERAGING,
    METHOD_IM_HDA,
    METHOD_IM_IT,
)
from app.models.core import PlantRecord
from app.models.plant import TrainedPlantModel
from app.models.synthetic import FleetManifest
from app.services.evaluation import (
    CONSISTENCY_JSON,
    REPORT_JSON,
    assemble_report,
    consistency_table,
    diverse_pool,
    leave_one_out_folds,
    pretrain_fleet,
    read_consistency,
    read_report,
    report_table,
    run_consistency,
    split_fleet,
    split_record,
    write_consistency,
    write_report,
)
from app.services.model_store import ModelStore
from app.services.plant_pipeline import trained_on
from app.services.simulation import simulate_ensemble
from app.services.synthetic import (
    default_fleet_configs,
    generate_fleet,
    plant_file_name,
    read_manifest,
    write_manifest,
)
from app.utils.config import RunConfig
from app.utils.csv_utils import read_plant_csv, write_frame_csv, write_plant_csv
from app.utils.errors import NotFoundError
from app.utils.formatting import format_weights
from app.utils.logging import get_logger
from app.utils.validation import validate_plant_ids

logger = get_logger("commands")

SIMULATION_DIR = "simulation"


def evaluation_start(config: RunConfig) -> datetime:
    start = datetime.combine(config.fleet.start, time(0), tzinfo=timezone.utc)
    return start + timedelta(days=config.split.pretrain_days)


def enabled_methods(config: RunConfig) -> List[str]:
    toggles = config.methods
    flags = [
        (toggles.im_hda, METHOD_IM_HDA),
        (toggles.im_it, METHOD_IM_IT),
        (toggles.averaging, METHOD_AVERAGING),
        (toggles.autopv, METHOD_AUTOPV),
    ]
    return [name for enabled, name in flags if enabled]


def cmd_generate(config: RunConfig) -> List[Path]:
    """
    Generate the synthetic fleet: one CSV per plant and the manifest.

    Raises:
        UnsupportedLatitudeError: For polar latitudes
    """
    fleet = config.fleet
    configs = default_fleet_configs(
        evaluation_start(config),
        latitude=fleet.latitude,
        noise_std=fleet.noise_std,
        plant_count=fleet.plant_count,
    )
    records = generate_fleet(
        configs, fleet.start, fleet.days, config.seeds.fleet, fleet.forecast_noise
    )

    data_dir = Path(config.paths.data_dir)
    paths = [write_plant_csv(rec, data_dir / plant_file_name(rec.id)) for rec in records]
    manifest = FleetManifest(
        start=fleet.start,
        days=fleet.days,
        seed=config.seeds.fleet,
        forecast_noise=fleet.forecast_noise,
        plants=configs,
        files=[p.name for p in paths],
    )
    paths.append(write_manifest(manifest, data_dir))
    logger.info("Fleet written", plants=len(records), directory=str(data_dir))
    return paths


def load_fleet(config: RunConfig) -> List[PlantRecord]:
    """
    Read every plant listed in the fleet manifest.

    Raises:
        NotFoundError: If the manifest or a plant file is missing
    """
    data_dir = Path(config.paths.data_dir)
    manifest = read_manifest(data_dir)
    return [
        read_plant_csv(
            data_dir / plant_file_name(plant.id),
            plant.id,
            plant.p_n,
            mounting=plant.mounting,
        )
        for plant in manifest.plants
    ]


def cmd_pretrain(config: RunConfig) -> List[Path]:
    """
    Train one model per plant on the pretraining period and store the
    bundles and trial logs.

    Raises:
        InsufficientDataError: If a plant has too little pretraining data
    """
    fleet = load_fleet(config)
    pre, _ = split_fleet(fleet, config.split.pretrain_days, config.split.test_days)
    models = pretrain_fleet(
        pre, seed=config.seeds.run, cash=config.cash, workers=config.workers
    )
    store = ModelStore(config.paths.model_dir, config.audit.include_timings)
    paths = []
    for model in models.values():
        paths.append(store.save(model))
        if model.search is not None:
            paths.append(store.trial_log_path(model.plant_id))
    logger.info("Pool pretrained", plants=len(models))
    return paths


def cmd_simulate(config: RunConfig, target_plant: str) -> List[Path]:
    """
    Replay the test period of one plant with the pretrained bundles of all
    other plants as the pool (or the most diverse ``pool_size`` of them).
    With ``own_model_after_days`` the plant's own model joins the pool on
    that day.

    Writes the forecast CSV and the weight log of the plant; the log is
    appended to as the replay runs.

    Raises:
        NotFoundError: If the plant or a pool bundle is missing
    """
    fleet = {rec.id: rec for rec in load_fleet(config)}
    validate_plant_ids([target_plant], list(fleet))
    store = ModelStore(config.paths.model_dir)
    pool_ids = [pid for pid in fleet if pid != target_plant]
    pool = store.load_many(pool_ids)

    _, test = split_record(
        fleet[target_plant], config.split.pretrain_days, config.split.test_days
    )
    pool = diverse_pool(pool, test, config.adaptation.pool_size)

    out_dir = Path(config.paths.report_dir) / SIMULATION_DIR
    log_path = out_dir / f"{target_plant}_weights.jsonl"
    log_path.unlink(missing_ok=True)
    sim = simulate_ensemble(
        test,
        pool,
        config.adaptation.cycle_days,
        config.adaptation.window_samples,
        adapt=config.adaptation.enabled,
        own_model_after_days=config.adaptation.own_model_after_days,
        seed=config.seeds.run,
        cash=config.cash,
        log_path=log_path,
    )

    frame = pd.DataFrame(
        {
            "timestamp": test.power.timestamps().strftime("%Y-%m-%dT%H:%M:%SZ"),
            "measured_kw": test.power.values,
            "forecast_kw": sim.forecast.values,
        }
    )
    paths = [
        write_frame_csv(frame, out_dir / f"{target_plant}_forecast.csv"),
        log_path,
    ]
    logger.info(
        "Simulation written",
        plant_id=target_plant,
        weights=format_weights(sim.final_state.pool_ids, sim.final_state.weights.w),
    )
    return paths


def stored_models(
    config: RunConfig, pre: List[PlantRecord]
) -> Optional[Dict[str, TrainedPlantModel]]:
    """
    Stored bundles of all plants, or None if any is missing or was not
    trained on exactly the given pretraining record.
    """
    store = ModelStore(config.paths.model_dir)
    try:
        models = {m.plant_id: m for m in store.load_many([rec.id for rec in pre])}
    except NotFoundError:
        return None
    stale = [rec.id for rec in pre if not trained_on(models[rec.id], rec)]
    if stale:
        logger.warning("Stored bundles do not match the fleet, pretraining again", plants=stale)
        return None
    return models


def cmd_evaluate(config: RunConfig) -> List[Path]:
    """
    Leave-one-out evaluation and, if enabled, the consistency run.

    Stored bundles are reused when every plant has one trained on its
    current pretraining period; otherwise the pool is pretrained in memory.
    """
    fleet = load_fleet(config)
    pre, _ = split_fleet(fleet, config.split.pretrain_days, config.split.test_days)
    pretrained = stored_models(config, pre)
    if pretrained is None:
        pretrained = pretrain_fleet(
            pre, seed=config.seeds.run, cash=config.cash, workers=config.workers
        )

    common = dict(
        pretrain_days=config.split.pretrain_days,
        test_days=config.split.test_days,
        cycle_days=config.adaptation.cycle_days,
        window_samples=config.adaptation.window_samples,
        seed=config.seeds.run,
        fleet_seed=config.seeds.fleet,
        cash=config.cash,
        workers=config.workers,
        pretrained=pretrained,
    )
    report_dir = Path(config.paths.report_dir)
    paths: List[Path] = []

    methods = enabled_methods(config)
    if methods:
        metadata, outcomes = leave_one_out_folds(
            fleet, methods=methods, pool_size=config.adaptation.pool_size, **common
        )
        report = assemble_report(metadata, outcomes)
        curves: Dict[str, pd.DataFrame] = {
            o.scores.plant_id: o.daily_curve
            for o in outcomes
            if o.daily_curve is not None
        }
        paths += write_report(report, report_dir, curves)
        logger.info("Evaluation report written", mean=report.mean)

    if config.methods.consistency:
        consistency = run_consistency(fleet, **common)
        paths += write_consistency(consistency, report_dir)
    return paths


def cmd_report(config: RunConfig, consistency: bool = False) -> str:
    """
    Text table of the stored evaluation report.

    Raises:
        NotFoundError: If no report was written yet
    """
    report = read_report(Path(config.paths.report_dir) / REPORT_JSON)
    text = report_table(report)
    if consistency:
        doc = read_consistency(Path(config.paths.report_dir) / CONSISTENCY_JSON)
        text += "\n" + consistency_table(doc)
    return text

