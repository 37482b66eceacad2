"""Tests for the day-by-day forecast replay."""

from datetime import timedelta

import numpy as np
import pytest

from app.core.constants import SAMPLES_PER_DAY
from app.models.ensemble import AdaptationStatus, WeightVector
from app.services.ensemble import combine, read_weight_log
from app.services.simulation import (
    day_bounds,
    individual_forecast,
    simulate_ensemble,
    simulate_incremental,
)
from app.utils.errors import InvalidPoolError, InvalidSeriesError


@pytest.fixture(scope="module")
def fold(fleet_split, pretrained, fleet_settings):
    """Target test record, pool of the other plants and the full simulation."""
    _, test = fleet_split
    target = test[0]
    pool = [pretrained[r.id] for r in test[1:]]
    sim = simulate_ensemble(
        target, pool, fleet_settings.cycle_days, fleet_settings.window_samples
    )
    return target, pool, sim


def test_day_bounds():
    """Test full and partial days."""
    assert day_bounds(8, 4) == [(0, 4), (4, 8)]
    assert day_bounds(10, 4) == [(0, 4), (4, 8), (8, 10)]
    assert day_bounds(0, 4) == []


def test_weight_log_length(fold, fleet_settings):
    """Test one entry for the start plus one per completed cycle."""
    _, _, sim = fold
    expected = 1 + fleet_settings.test_days // fleet_settings.cycle_days
    assert len(sim.weight_log) == expected
    assert sim.weight_log[0].status == AdaptationStatus.INITIAL
    assert all(e.status == AdaptationStatus.ADAPTED for e in sim.adaptations)
    assert sim.adaptations[0].timestamp == sim.forecast.start + timedelta(
        days=fleet_settings.cycle_days
    )


def test_first_cycle_uses_equal_weights(fold, fleet_settings):
    """Test that days before the first adaptation use 1/N weights."""
    target, pool, sim = fold
    k = fleet_settings.cycle_days * SAMPLES_PER_DAY
    equal = combine(sim.pool_forecasts[:k], WeightVector.equal(len(pool)))
    np.testing.assert_allclose(sim.scaled_forecast.values[:k], equal, rtol=0, atol=1e-12)
    np.testing.assert_allclose(
        sim.forecast.values, sim.scaled_forecast.values * target.p_n, rtol=1e-12
    )


def test_truncated_run_agrees(fold, fleet_settings):
    """Test that forecasts do not depend on days after them."""
    target, pool, sim = fold
    n = 10 * SAMPLES_PER_DAY
    short = simulate_ensemble(
        target.slice(0, n), pool, fleet_settings.cycle_days, fleet_settings.window_samples
    )
    np.testing.assert_array_equal(short.forecast.values, sim.forecast.values[:n])


def test_future_measurements_are_not_used(fold, fleet_settings):
    """Test that changing the last days' measurements keeps every forecast."""
    target, pool, sim = fold
    power = target.power.values.copy()
    power[10 * SAMPLES_PER_DAY :] = 0.0
    changed = target.model_copy(update={"power": target.power.with_values(power)})
    other = simulate_ensemble(
        changed, pool, fleet_settings.cycle_days, fleet_settings.window_samples
    )
    np.testing.assert_array_equal(other.forecast.values, sim.forecast.values)


def test_without_adaptation_is_averaging(fold, fleet_settings):
    """Test that adapt=False keeps equal weights for the whole period."""
    target, pool, sim = fold
    avg = simulate_ensemble(
        target,
        pool,
        fleet_settings.cycle_days,
        fleet_settings.window_samples,
        adapt=False,
        pool_forecasts=sim.pool_forecasts,
    )
    expected = combine(sim.pool_forecasts, WeightVector.equal(len(pool)))
    np.testing.assert_allclose(avg.scaled_forecast.values, expected, rtol=0, atol=1e-12)
    assert len(avg.weight_log) == 1


def test_shared_pool_forecasts(fold, fleet_settings):
    """Test that precomputed pool forecasts reproduce the run."""
    target, pool, sim = fold
    again = simulate_ensemble(
        target,
        pool,
        fleet_settings.cycle_days,
        fleet_settings.window_samples,
        pool_forecasts=sim.pool_forecasts,
    )
    np.testing.assert_array_equal(again.forecast.values, sim.forecast.values)
    assert not sim.pool_forecasts.flags.writeable

    with pytest.raises(InvalidSeriesError):
        simulate_ensemble(target, pool, pool_forecasts=sim.pool_forecasts[:10])


def test_individual_forecast(fleet_split, pretrained):
    """Test the own-model forecast in kW."""
    _, test = fleet_split
    rec = test[0]
    out = individual_forecast(pretrained[rec.id], rec)
    assert out.start == rec.power.start
    assert len(out) == len(rec.power)
    assert out.values.min() >= 0.0


def test_incremental_first_cycle_is_zero(fleet_split, ridge_spec, fleet_settings):
    """Test retraining with a fixed spec every three days."""
    _, test = fleet_split
    rec = test[1]
    forecast, provenances = simulate_incremental(rec, cycle_days=3, spec=ridge_spec)

    np.testing.assert_array_equal(forecast.values[: 3 * SAMPLES_PER_DAY], 0.0)
    assert forecast.values[3 * SAMPLES_PER_DAY :].max() > 0.0
    assert len(provenances) == (fleet_settings.test_days - 1) // 3
    assert all(p.start == rec.power.start for p in provenances)
    ends = [p.end for p in provenances]
    assert ends == [rec.power.start + timedelta(days=3 * (i + 1)) for i in range(len(ends))]


def test_incremental_searches_first(fleet_split, cash_config, fleet_settings):
    """Test that the first retraining runs a search."""
    _, test = fleet_split
    rec = test[2]
    forecast, provenances = simulate_incremental(
        rec, cycle_days=fleet_settings.cycle_days, seed=1, cash=cash_config
    )
    assert len(provenances) == 1
    assert provenances[0].end == rec.power.start + timedelta(days=fleet_settings.cycle_days)
    np.testing.assert_array_equal(
        forecast.values[: fleet_settings.cycle_days * SAMPLES_PER_DAY], 0.0
    )


def test_own_model_joins_the_pool(fold, fleet_settings, cash_config, tmp_path):
    """Test the pool extension with the plant's own model mid-replay."""
    target, pool, sim = fold
    day = fleet_settings.cycle_days
    log_path = tmp_path / "weights.jsonl"
    extended = simulate_ensemble(
        target,
        pool,
        fleet_settings.cycle_days,
        fleet_settings.window_samples,
        own_model_after_days=day,
        cash=cash_config,
        log_path=log_path,
    )

    statuses = [e.status for e in extended.weight_log]
    assert statuses == [
        AdaptationStatus.INITIAL,
        AdaptationStatus.EXTENDED,
        AdaptationStatus.NOT_YET,
        AdaptationStatus.ADAPTED,
    ]
    joined = extended.weight_log[1]
    assert joined.pool_ids == [m.plant_id for m in pool] + [target.id]
    np.testing.assert_allclose(joined.weights, [1.0 / (len(pool) + 1)] * (len(pool) + 1))
    for entry in extended.weight_log:
        assert sum(entry.weights) == pytest.approx(1.0)
        assert min(entry.weights) >= 0.0

    own = extended.final_state.pool[-1]
    assert own.provenance.end == target.power.start + timedelta(days=day)
    assert extended.pool_forecasts.shape == (len(target.power), len(pool) + 1)

    k = day * SAMPLES_PER_DAY
    np.testing.assert_array_equal(extended.forecast.values[:k], sim.forecast.values[:k])
    assert read_weight_log(log_path) == extended.weight_log


@pytest.mark.parametrize("day", [0, 14])
def test_own_model_day_outside_period(fold, fleet_settings, day):
    """Test that the own model must join within the test period."""
    target, pool, _ = fold
    with pytest.raises(InvalidPoolError):
        simulate_ensemble(
            target,
            pool,
            fleet_settings.cycle_days,
            fleet_settings.window_samples,
            own_model_after_days=day,
        )
