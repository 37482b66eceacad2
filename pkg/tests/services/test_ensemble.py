"""Tests for the weighted ensemble and its adaptation."""

import unittest

import numpy as np
import pytest

from app.core.constants import SAMPLES_PER_DAY
from app.models.ensemble import AdaptationStatus, WeightVector
from app.services.ensemble import (
    adaptation_step,
    append_weight_log,
    bounded_lsq_weights,
    combine,
    ensemble_predict,
    extend_pool,
    init_equal,
    optimize_weights,
    pool_forecast_matrix,
    read_weight_log,
    select_diverse_pool,
    weight_log_entry,
    windowed_mse,
)
from app.utils.errors import DegenerateWindowError, InvalidPoolError, InvalidSeriesError


def orientation_curves(days: int = 7) -> np.ndarray:
    """Scaled daily curves peaking in the morning, at noon and in the afternoon."""
    hours = (np.arange(days * SAMPLES_PER_DAY) % SAMPLES_PER_DAY) / 4.0
    columns = []
    for peak in (10.0, 12.0, 14.0):
        curve = np.exp(-0.5 * ((hours - peak) / 2.0) ** 2)
        curve[(hours < 6.0) | (hours > 18.0)] = 0.0
        columns.append(0.9 * curve)
    return np.column_stack(columns)


class TestInitAndCombine(unittest.TestCase):
    """Test cases for the cold start and the weighted combination."""

    @pytest.fixture(autouse=True)
    def _models(self, constant_model):
        self.make = constant_model

    def pool(self, n: int):
        return [self.make(0.1 * (i + 1), plant_id=f"m{i}") for i in range(n)]

    def test_equal_weights(self):
        """Test 1/N weights for ten and for two models."""
        st = init_equal(self.pool(10), 5.0, cycle_days=7, window_samples=672)
        np.testing.assert_allclose(st.weights.w, [0.1] * 10)
        self.assertAlmostEqual(sum(st.weights.w), 1.0, places=12)
        self.assertEqual(st.last_status, AdaptationStatus.INITIAL)
        self.assertEqual(init_equal(self.pool(2), 5.0).weights.w, [0.5, 0.5])

    def test_pool_too_small(self):
        """Test that a single model is not an ensemble."""
        with self.assertRaises(InvalidPoolError):
            init_equal(self.pool(1), 5.0)

    def test_window_shorter_than_pool(self):
        """Test that K must be at least N."""
        with self.assertRaises(InvalidPoolError):
            init_equal(self.pool(3), 5.0, window_samples=2)

    def test_one_hot_selects_column(self):
        """Test that a one-hot weight returns that model's forecast."""
        F = orientation_curves(1)
        np.testing.assert_array_equal(combine(F, WeightVector(w=[0.0, 1.0, 0.0])), F[:, 1])

    def test_combination_is_convex(self):
        """Test that the ensemble stays between the lowest and highest member."""
        F = orientation_curves(2)
        out = combine(F, WeightVector(w=[0.2, 0.5, 0.3]))
        self.assertTrue(np.all(out >= F.min(axis=1) - 1e-12))
        self.assertTrue(np.all(out <= F.max(axis=1) + 1e-12))


class TestOptimizeWeights(unittest.TestCase):
    """Test cases for the windowed weight fit."""

    def setUp(self):
        self.F = orientation_curves()
        self.prev = WeightVector.equal(3)

    def test_exact_mixture(self):
        """Test recovery of a target inside the convex hull."""
        truth = np.array([0.2, 0.5, 0.3])
        w = optimize_weights(self.F, self.F @ truth, self.prev)
        np.testing.assert_allclose(w.w, truth, atol=1e-6)

    def test_two_member_mixture(self):
        """Test recovery of a 0.7/0.3 mixture with an unused third member."""
        w = optimize_weights(self.F, self.F @ np.array([0.7, 0.3, 0.0]), self.prev)
        np.testing.assert_allclose(w.w, [0.7, 0.3, 0.0], atol=1e-6)

    def test_night_rows_leave_weights_unchanged(self):
        """Test that rows with zero forecasts and zero target do not move the fit."""
        rng = np.random.default_rng(4)
        target = self.F @ np.array([0.5, 0.2, 0.3]) + rng.normal(0.0, 0.02, self.F.shape[0])
        base = optimize_weights(self.F, target, self.prev)

        night = np.zeros((2 * SAMPLES_PER_DAY, 3))
        F = np.vstack([night, self.F[:300], night, self.F[300:], night])
        y = np.concatenate([night[:, 0], target[:300], night[:, 0], target[300:], night[:, 0]])
        padded = optimize_weights(F, y, self.prev)
        np.testing.assert_allclose(padded.w, base.w, atol=1e-9)

    def test_identical_members(self):
        """Test that duplicated members still reproduce the target."""
        F = np.column_stack([self.F[:, 1], self.F[:, 1]])
        w = optimize_weights(F, self.F[:, 1], WeightVector.equal(2))
        self.assertAlmostEqual(sum(w.w), 1.0, places=12)
        np.testing.assert_allclose(F @ w.array(), self.F[:, 1], atol=1e-6)

    def test_close_to_grid_optimum(self):
        """Test against a brute-force search over two-member weights."""
        rng = np.random.default_rng(0)
        F = self.F[:, :2]
        target = F @ np.array([0.35, 0.65]) + rng.normal(0.0, 0.01, F.shape[0])
        w = optimize_weights(F, target, WeightVector.equal(2))
        grid = min(
            windowed_mse(F, target, np.array([a, 1.0 - a])) for a in np.linspace(0.0, 1.0, 101)
        )
        self.assertLessEqual(windowed_mse(F, target, w.array()), grid * 1.01 + 1e-12)

    def test_simplex_grid_oracle(self):
        """Test that no simplex grid point (step 0.05) beats the solver."""
        target = self.F @ np.array([0.7, 0.3, 0.0])
        w = optimize_weights(self.F, target, self.prev)
        grid = min(
            windowed_mse(self.F, target, np.array([i, j, 20 - i - j]) / 20.0)
            for i in range(21)
            for j in range(21 - i)
        )
        self.assertLessEqual(windowed_mse(self.F, target, w.array()), grid + 1e-9)

    def test_box_residual_below_equal_weights(self):
        """Test the bounded fit before normalization against equal weights."""
        rng = np.random.default_rng(2)
        target = self.F @ np.array([0.5, 0.1, 0.2]) + rng.normal(0.0, 0.05, self.F.shape[0])
        raw = bounded_lsq_weights(self.F, target)
        self.assertTrue(np.all((raw >= 0.0) & (raw <= 1.0)))
        self.assertLessEqual(
            windowed_mse(self.F, target, raw),
            windowed_mse(self.F, target, self.prev.array()) + 1e-9,
        )

    def test_noisy_mixture_recovered(self):
        """Test recovery to 0.05 under measurement noise."""
        rng = np.random.default_rng(1)
        target = self.F @ np.array([0.6, 0.0, 0.4]) + rng.normal(0.0, 0.02, self.F.shape[0])
        w = optimize_weights(self.F, np.maximum(target, 0.0), self.prev)
        np.testing.assert_allclose(w.w, [0.6, 0.0, 0.4], atol=0.05)

    def test_all_zero_forecasts(self):
        """Test the degenerate window where every member forecasts zero."""
        with self.assertRaises(DegenerateWindowError) as ctx:
            optimize_weights(np.zeros((96, 3)), np.ones(96), self.prev)
        self.assertEqual(ctx.exception.previous, self.prev)

    def test_zero_target(self):
        """Test the degenerate window where the bounded solution vanishes."""
        with self.assertRaises(DegenerateWindowError):
            optimize_weights(self.F, np.zeros(self.F.shape[0]), self.prev)

    def test_length_mismatch(self):
        """Test that forecasts and target must have equal length."""
        with self.assertRaises(InvalidSeriesError):
            optimize_weights(self.F, np.zeros(10), self.prev)


class TestAdaptationStep(unittest.TestCase):
    """Test cases for adaptation_step."""

    @pytest.fixture(autouse=True)
    def _fixtures(self, constant_model, make_series):
        self.pool = [constant_model(0.5, plant_id=f"m{i}") for i in range(3)]
        self.make_series = make_series

    def setUp(self):
        self.F = orientation_curves()
        self.p_n = 4.0

    def state(self, window: int = 7 * SAMPLES_PER_DAY):
        return init_equal(self.pool, self.p_n, cycle_days=7, window_samples=window)

    def measurements(self, weights):
        return self.make_series(self.p_n * (self.F @ np.asarray(weights)))

    def test_not_yet(self):
        """Test that a short history leaves the state unchanged."""
        st = self.state()
        power = self.make_series(np.zeros(100))
        after = adaptation_step(st, power, self.F[:100])
        self.assertEqual(after.last_status, AdaptationStatus.NOT_YET)
        self.assertEqual(after.weights, st.weights)

    def test_adapts_to_mixture(self):
        """Test recovery from kW measurements of a noiseless mixture."""
        st = adaptation_step(self.state(), self.measurements([0.7, 0.3, 0.0]), self.F)
        self.assertEqual(st.last_status, AdaptationStatus.ADAPTED)
        np.testing.assert_allclose(st.weights.w, [0.7, 0.3, 0.0], atol=0.05)
        self.assertLessEqual(st.last_window_mse, 1e-10)
        self.assertEqual(st.last_adaptation, self.make_series(self.F[:, 0]).end)

    def test_idempotent(self):
        """Test that adapting twice on the same data gives the same weights."""
        power = self.measurements([0.1, 0.6, 0.3])
        once = adaptation_step(self.state(), power, self.F)
        twice = adaptation_step(once, power, self.F)
        np.testing.assert_allclose(twice.weights.w, once.weights.w, atol=1e-12)

    def test_uses_latest_window_only(self):
        """Test that samples before the window do not influence the weights."""
        window = 2 * SAMPLES_PER_DAY
        power = self.measurements([0.5, 0.5, 0.0])
        changed = power.values.copy()
        changed[:window] = 0.0
        a = adaptation_step(self.state(window), power, self.F)
        b = adaptation_step(self.state(window), power.with_values(changed), self.F)
        self.assertEqual(a.weights, b.weights)

    def test_degenerate_window_keeps_weights(self):
        """Test that an all-zero forecast window keeps the weights."""
        st = self.state()
        after = adaptation_step(st, self.make_series(np.ones(len(self.F))), np.zeros_like(self.F))
        self.assertEqual(after.last_status, AdaptationStatus.DEGENERATE)
        self.assertEqual(after.weights, st.weights)
        self.assertIsNone(after.last_adaptation)

    def test_misaligned_history(self):
        """Test that forecast history and measurements must align."""
        with self.assertRaises(InvalidSeriesError):
            adaptation_step(self.state(), self.make_series(np.zeros(10)), self.F[:11])


def test_ensemble_predict_rescales(constant_model, make_series):
    """Test the kW forecast of two constant members."""
    st = init_equal([constant_model(0.2, "a"), constant_model(0.6, "b")], 5.0, window_samples=4)
    out = ensemble_predict(st, make_series([0.0, 500.0]), make_series([10.0, 10.0]))
    np.testing.assert_allclose(out.values, [0.0, 2.0], rtol=1e-12)
    F = pool_forecast_matrix(st.pool, make_series([500.0]), make_series([10.0]))
    np.testing.assert_allclose(F, [[0.2, 0.6]])


def test_extend_pool(constant_model):
    """Test appending the target plant's own model."""
    st = init_equal([constant_model(0.1, "a"), constant_model(0.2, "b")], 2.0, window_samples=10)
    extended = extend_pool(st, constant_model(0.3, "own"))
    np.testing.assert_allclose(extended.weights.w, [1 / 3, 1 / 3, 1 / 3])
    assert extended.pool_ids == ["a", "b", "own"]
    assert extended.last_status == AdaptationStatus.EXTENDED

    half = extend_pool(st, constant_model(0.3, "own"), weight=0.5)
    np.testing.assert_allclose(half.weights.w, [0.25, 0.25, 0.5])

    with pytest.raises(InvalidPoolError):
        extend_pool(st, constant_model(0.3, "own"), weight=1.5)


@pytest.mark.parametrize(
    "size, expected",
    [(2, ["a", "b"]), (3, ["a", "b", "c"])],
)
def test_select_diverse_pool(size, expected):
    """Test greedy max-min selection with ties going to the earlier id."""
    curves = {
        "a": np.array([0.0, 0.0]),
        "b": np.array([1.0, 1.0]),
        "c": np.array([0.9, 0.9]),
        "d": np.array([0.1, 0.1]),
    }
    assert select_diverse_pool(curves, size) == expected


@pytest.mark.parametrize("size", [1, 5])
def test_select_diverse_pool_size(size):
    """Test that the pool size must lie between 2 and the candidate count."""
    curves = {k: np.zeros(2) for k in "abcd"}
    with pytest.raises(InvalidPoolError):
        select_diverse_pool(curves, size)


def test_weight_log(constant_model, tmp_path, series_start):
    """Test writing, appending and reading the weight history."""
    st = init_equal([constant_model(0.1, "a"), constant_model(0.2, "b")], 2.0, window_samples=10)
    first = weight_log_entry(st, series_start)
    path = tmp_path / "weights" / "plant.jsonl"
    append_weight_log(path, first)

    adapted = st.model_copy(
        update={
            "weights": WeightVector(w=[0.25, 0.75]),
            "last_status": AdaptationStatus.ADAPTED,
            "last_window_mse": 0.01,
        }
    )
    append_weight_log(path, weight_log_entry(adapted, series_start))

    entries = read_weight_log(path)
    assert [e.status for e in entries] == [AdaptationStatus.INITIAL, AdaptationStatus.ADAPTED]
    assert entries[0] == first
    assert entries[1].weights == [0.25, 0.75]
    assert entries[1].pool_ids == ["a", "b"]
