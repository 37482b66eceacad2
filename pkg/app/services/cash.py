"""
Combined algorithm selection and hyperparameter search (CASH).

A search strategy proposes estimator specs one at a time; each is fitted on
the training rows and scored on the hold-out rows. The search ends when the
spread of the best validation errors has stayed flat long enough, when the
trial budget is spent or when the strategy has nothing left to propose.
"""

import json
import time
from abc import ABC, abstractmethod
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from app.core.constants import (
    DEFAULT_MAX_TRIALS,
    GB_LEARNING_RATE_RANGE,
    MAX_DEPTH_RANGE,
    MLP_ACTIVATIONS,
    MLP_LAYER_COUNT_RANGE,
    MLP_LAYER_WIDTH_RANGE,
    N_ESTIMATORS_RANGE,
    PLATEAU_PATIENCE,
    PLATEAU_STD_THRESHOLD,
    PLATEAU_TOP_K,
    RIDGE_ALPHA_RANGE,
)
from app.models.estimator import (
    EstimatorKind,
    EstimatorSpec,
    GradientBoostingParams,
    MLPParams,
    RandomForestParams,
    RidgeParams,
    SearchState,
    TrainedEstimator,
    TrialRecord,
)
from app.services import regressors
from app.utils.errors import InsufficientDataError, SearchFailedError, serialize_error
from app.utils.logging import get_logger

logger = get_logger("cash")

Split = Tuple[np.ndarray, np.ndarray]


def _log_uniform(rng: np.random.Generator, bounds: Tuple[float, float]) -> float:
    low, high = np.log(bounds[0]), np.log(bounds[1])
    return float(np.exp(rng.uniform(low, high)))


def _int_uniform(rng: np.random.Generator, bounds: Tuple[int, int]) -> int:
    return int(rng.integers(bounds[0], bounds[1] + 1))


def sample_spec(
    rng: np.random.Generator,
    kinds: Optional[Sequence[EstimatorKind]] = None,
) -> EstimatorSpec:
    """
    Draw one point of the configuration space.

    Integer hyperparameters are uniform on their ranges; ``alpha`` and
    ``learning_rate`` are log-uniform; the MLP layer count is uniform over
    1..3. The estimator seed is drawn from the same generator.

    Args:
        rng: Search generator
        kinds: Estimator families to draw from (all four if None)

    Returns:
        EstimatorSpec
    """
    kinds = list(kinds or EstimatorKind)
    kind = EstimatorKind(kinds[int(rng.integers(len(kinds)))])

    if kind == EstimatorKind.RIDGE:
        params = RidgeParams(alpha=_log_uniform(rng, RIDGE_ALPHA_RANGE))
    elif kind == EstimatorKind.MLP:
        activation = MLP_ACTIVATIONS[int(rng.integers(len(MLP_ACTIVATIONS)))]
        n_layers = _int_uniform(rng, MLP_LAYER_COUNT_RANGE)
        params = MLPParams(
            activation=activation,
            hidden_layer_sizes=[
                _int_uniform(rng, MLP_LAYER_WIDTH_RANGE) for _ in range(n_layers)
            ],
        )
    elif kind == EstimatorKind.GRADIENT_BOOSTING:
        params = GradientBoostingParams(
            learning_rate=_log_uniform(rng, GB_LEARNING_RATE_RANGE),
            n_estimators=_int_uniform(rng, N_ESTIMATORS_RANGE),
            max_depth=_int_uniform(rng, MAX_DEPTH_RANGE),
        )
    else:
        params = RandomForestParams(
            n_estimators=_int_uniform(rng, N_ESTIMATORS_RANGE),
            max_depth=_int_uniform(rng, MAX_DEPTH_RANGE),
        )
    return EstimatorSpec(params=params, seed=int(rng.integers(2**31 - 1)))


class SearchStrategy(ABC):
    """Proposes the next spec to try given the trials so far."""

    @abstractmethod
    def propose(self, state: SearchState) -> Optional[EstimatorSpec]:
        """Next spec, or None when the strategy has nothing left."""


class RandomSearchStrategy(SearchStrategy):
    """
    Seeded random search.

    Warm-start specs are proposed first, in order; by default a single
    Ridge(alpha=1) baseline, so the search never ends worse than it.
    """

    def __init__(
        self,
        seed: int = 0,
        kinds: Optional[Sequence[EstimatorKind]] = None,
        warm_start: Optional[List[EstimatorSpec]] = None,
    ):
        self.rng = np.random.default_rng(seed)
        self.kinds = list(kinds) if kinds else list(EstimatorKind)
        if warm_start is None:
            warm_start = [EstimatorSpec(params=RidgeParams(alpha=1.0), seed=seed)]
        self.warm_start = warm_start

    def propose(self, state: SearchState) -> Optional[EstimatorSpec]:
        n = len(state.trials)
        if n < len(self.warm_start):
            return self.warm_start[n]
        return sample_spec(self.rng, self.kinds)


class FixedSpecStrategy(SearchStrategy):
    """Proposes each spec of a fixed list once, then ends the search."""

    def __init__(self, specs: List[EstimatorSpec]):
        self.specs = list(specs)

    def propose(self, state: SearchState) -> Optional[EstimatorSpec]:
        n = len(state.trials)
        return self.specs[n] if n < len(self.specs) else None


def plateau_counter(
    trials: Sequence[TrialRecord],
    top_k: int = PLATEAU_TOP_K,
    std_threshold: float = PLATEAU_STD_THRESHOLD,
) -> int:
    """
    Completions since the top-k spread last dropped below the threshold.

    The counter is 0 on the completion where the population std of the k
    best validation errors first falls below ``std_threshold`` and grows by
    one per further completion while it stays there. Failed trials are not
    completions. Returns -1 while no plateau is in progress.
    """
    mses: List[float] = []
    counter = -1
    for trial in trials:
        if not trial.succeeded:
            continue
        mses.append(trial.validation_mse)
        if len(mses) < top_k:
            continue
        top = np.sort(np.asarray(mses))[:top_k]
        if float(np.std(top)) < std_threshold:
            counter += 1
        else:
            counter = -1
    return counter


def plateau_stop(
    trials: Sequence[TrialRecord],
    top_k: int = PLATEAU_TOP_K,
    std_threshold: float = PLATEAU_STD_THRESHOLD,
    patience: int = PLATEAU_PATIENCE,
) -> bool:
    """
    Whether the top-k validation errors have stayed within ``std_threshold``
    for ``patience`` consecutive completions.

    Pure function of the trial list, so it can be replayed from a trial log.

    Examples:
        >>> plateau_stop([])
        False
    """
    return plateau_counter(trials, top_k, std_threshold) >= patience


def validation_mse(est: TrainedEstimator, X: np.ndarray, y: np.ndarray) -> float:
    """Hold-out MSE of the clipped (non-negative) predictions."""
    pred = np.maximum(regressors.predict(est, X), 0.0)
    return float(np.mean((pred - y) ** 2))


def run_cash(
    train: Split,
    val: Split,
    seed: int = 0,
    max_trials: int = DEFAULT_MAX_TRIALS,
    strategy: Optional[SearchStrategy] = None,
    kinds: Optional[Sequence[EstimatorKind]] = None,
    top_k: int = PLATEAU_TOP_K,
    std_threshold: float = PLATEAU_STD_THRESHOLD,
    patience: int = PLATEAU_PATIENCE,
) -> Tuple[TrainedEstimator, SearchState]:
    """
    Search the configuration space for the lowest hold-out MSE.

    Args:
        train: Training rows (X, y)
        val: Hold-out rows (X, y), disjoint from train
        seed: Seed of the default random strategy
        max_trials: Trial budget
        strategy: Spec proposer (seeded random search if None)
        kinds: Estimator families for the default strategy
        top_k: Number of best trials whose spread is watched
        std_threshold: Spread below which the search counts as flat
        patience: Flat completions needed to stop

    Returns:
        Tuple (best fitted estimator, search state)

    Raises:
        InsufficientDataError: If the hold-out split is empty
        SearchFailedError: If no trial could be fitted
    """
    X_val, y_val = val
    if len(y_val) == 0:
        raise InsufficientDataError("CASH needs a non-empty validation split")

    strategy = strategy or RandomSearchStrategy(seed=seed, kinds=kinds)
    state = SearchState(rng_seed=seed)
    best_est: Optional[TrainedEstimator] = None
    best_mse = np.inf

    logger.info("CASH search started", max_trials=max_trials, seed=seed)
    for index in range(max_trials):
        spec = strategy.propose(state)
        if spec is None:
            break

        started = time.perf_counter()
        try:
            est = regressors.fit(spec, *train)
            mse = validation_mse(est, X_val, y_val)
            record = TrialRecord(
                index=index,
                spec=spec,
                validation_mse=mse,
                wall_time=time.perf_counter() - started,
            )
        except Exception as e:
            logger.warning("Trial failed", trial=index, spec=spec.label(), error=str(e))
            record = TrialRecord(
                index=index,
                spec=spec,
                wall_time=time.perf_counter() - started,
                error=serialize_error(e),
            )
        else:
            logger.debug(
                "Trial finished",
                trial=index,
                kind=spec.kind.value,
                validation_mse=mse,
                wall_time=record.wall_time,
            )
            if mse < best_mse:
                best_mse, best_est = mse, est
                state.best = len(state.trials)

        state.trials.append(record)
        state.patience_counter = max(
            plateau_counter(state.trials, top_k, std_threshold), 0
        )
        if plateau_stop(state.trials, top_k, std_threshold, patience):
            state.stopped_by_plateau = True
            logger.info("CASH plateau reached", trials=len(state.trials))
            break

    if best_est is None:
        raise SearchFailedError(
            "Every CASH trial failed",
            causes=[t.error for t in state.trials if t.error],
        )

    logger.info(
        "CASH search finished",
        trials=len(state.trials),
        best_spec=best_est.spec.label(),
        best_validation_mse=best_mse,
    )
    return best_est, state


def write_trial_log(
    path: Union[str, Path], state: SearchState, include_timings: bool = False
) -> Path:
    """
    Write one JSON line per trial, in index order.

    Wall times are left out unless requested, so logs of identical runs are
    byte-identical.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    exclude = None if include_timings else {"wall_time"}
    with open(path, "w") as f:
        for trial in state.trials:
            f.write(json.dumps(trial.model_dump(mode="json", exclude=exclude), sort_keys=True))
            f.write("\n")
    return path


def read_trial_log(path: Union[str, Path]) -> List[TrialRecord]:
    """Trials of a log written by :func:`write_trial_log`."""
    with open(path, "r") as f:
        return [TrialRecord.model_validate_json(line) for line in f if line.strip()]
