"""Depth-limited least-squares regression trees, the building block of both
tree ensembles."""

from typing import Any, Dict, List, Optional, Tuple

import numpy as np

LEAF = -1
MAX_BINS = 255


class RegressionTree:
    """
    Binary regression tree stored as flat node arrays.

    Node 0 is the root. Internal nodes send rows with
    ``X[:, feature] <= threshold`` to ``left``; leaves have ``feature == -1``
    and predict ``value``.
    """

    def __init__(
        self,
        feature: np.ndarray,
        threshold: np.ndarray,
        left: np.ndarray,
        right: np.ndarray,
        value: np.ndarray,
    ):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64)

    @property
    def node_count(self) -> int:
        return int(self.feature.shape[0])

    def depth(self) -> int:
        depths = np.zeros(self.node_count, dtype=np.int64)
        for node in range(self.node_count):
            if self.feature[node] != LEAF:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            internal = self.feature[node] != LEAF
            if not internal.any():
                break
            idx = rows[internal]
            current = node[idx]
            go_left = X[idx, self.feature[current]] <= self.threshold[current]
            node[idx] = np.where(go_left, self.left[current], self.right[current])
        return self.value[node]

    def get_state(self) -> Dict[str, Any]:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_state(cls, state: Dict[str, Any]) -> "RegressionTree":
        return cls(
            state["feature"],
            state["threshold"],
            state["left"],
            state["right"],
            state["value"],
        )


class FeatureBins:
    """
    Candidate thresholds per column and the bin code of every row.

    A row with code ``k`` in column ``f`` satisfies
    ``X[row, f] <= thresholds[f][k]`` and exceeds every lower threshold.
    """

    def __init__(self, thresholds: List[np.ndarray], codes: np.ndarray):
        self.thresholds = thresholds
        self.codes = codes

    def take(self, rows: np.ndarray) -> "FeatureBins":
        return FeatureBins(self.thresholds, self.codes[rows])


def bin_features(X: np.ndarray, max_bins: int = MAX_BINS) -> FeatureBins:
    """
    Bin every column once for all splits of a fit.

    Columns with at most ``max_bins`` distinct values get the midpoints
    between consecutive values, which makes the split search exact; other
    columns get quantile thresholds.
    """
    thresholds: List[np.ndarray] = []
    codes = np.empty(X.shape, dtype=np.int32)
    for f in range(X.shape[1]):
        x = X[:, f]
        values = np.unique(x)
        if values.shape[0] <= max_bins:
            lo, hi = values[:-1], values[1:]
            mid = 0.5 * (lo + hi)
            t = np.where(mid < hi, mid, lo)
        else:
            levels = np.linspace(0.0, 1.0, max_bins + 1)[1:-1]
            t = np.unique(np.quantile(x, levels))
        thresholds.append(t)
        codes[:, f] = np.searchsorted(t, x, side="left")
    return FeatureBins(thresholds, codes)


def _best_split(
    codes: np.ndarray, y: np.ndarray, n_thresholds: np.ndarray
) -> Optional[Tuple[float, int, int]]:
    """
    Lowest children SSE over all thresholds of the given binned columns.

    Args:
        codes: Bin codes of the node's rows, one column per candidate feature
        y: Node targets
        n_thresholds: Threshold count of every candidate column

    Returns:
        Tuple (sse, column position, threshold index), or None without a
        split that leaves rows on both sides
    """
    m, c = codes.shape
    width = int(n_thresholds.max()) + 1
    if width == 1:
        return None
    flat = (codes + np.arange(c) * width).ravel()
    size = c * width

    def hist(weights: Optional[np.ndarray]) -> np.ndarray:
        counts = np.bincount(flat, weights=weights, minlength=size)
        return np.cumsum(counts.reshape(c, width), axis=1)

    count = hist(None).astype(np.float64)
    csum = hist(np.repeat(y, c))
    csum2 = hist(np.repeat(y * y, c))
    total, total2 = csum[:, -1:], csum2[:, -1:]
    count, csum, csum2 = count[:, :-1], csum[:, :-1], csum2[:, :-1]
    n_right = m - count
    valid = (count > 0) & (n_right > 0)
    if not valid.any():
        return None

    with np.errstate(divide="ignore", invalid="ignore"):
        sse_left = csum2 - csum * csum / count
        sse_right = (total2 - csum2) - (total - csum) ** 2 / n_right
    sse = np.maximum(sse_left, 0.0) + np.maximum(sse_right, 0.0)
    sse = np.where(valid, sse, np.inf)
    j, k = divmod(int(np.argmin(sse)), width - 1)
    return float(sse[j, k]), j, k


def regression_tree_fit(
    X: np.ndarray,
    residuals: np.ndarray,
    max_depth: int,
    max_features: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    bins: Optional[FeatureBins] = None,
) -> RegressionTree:
    """
    Grow a least-squares regression tree.

    Each split minimizes the summed squared deviation of the two children;
    ties go to the lower feature index, then the lower threshold. Leaves hold
    the mean of their rows.

    Splits are searched over the thresholds of ``bins``; see
    :func:`bin_features`.

    Args:
        X: Feature rows
        residuals: Regression target per row
        max_depth: Maximum depth (root has depth 0)
        max_features: Candidate features drawn per split (all if None)
        rng: Generator for feature subsampling
        bins: Binned rows of X (computed from X when None)

    Returns:
        RegressionTree
    """
    n_features = X.shape[1]
    bins = bins if bins is not None else bin_features(X)
    n_thresholds = np.array([t.shape[0] for t in bins.thresholds])
    if max_features is not None and max_features < n_features and rng is None:
        rng = np.random.default_rng(0)

    feature: List[int] = []
    threshold: List[float] = []
    left: List[int] = []
    right: List[int] = []
    value: List[float] = []

    def new_node(rows: np.ndarray) -> int:
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(float(residuals[rows].mean()))
        return len(feature) - 1

    root_rows = np.arange(X.shape[0])
    stack = [(new_node(root_rows), root_rows, 0)]
    while stack:
        node, rows, depth = stack.pop()
        if depth >= max_depth or rows.shape[0] < 2:
            continue

        y = residuals[rows] - value[node]
        parent_sse = float(np.dot(y, y))
        if parent_sse <= 0.0:
            continue

        if max_features is not None and max_features < n_features:
            candidates = np.sort(
                rng.choice(n_features, size=max_features, replace=False)
            )
        else:
            candidates = np.arange(n_features)

        best = _best_split(bins.codes[np.ix_(rows, candidates)], y, n_thresholds[candidates])
        if best is None or best[0] >= parent_sse * (1.0 - 1e-12):
            continue

        _, j, k = best
        f = int(candidates[j])
        thr = float(bins.thresholds[f][k])
        mask = bins.codes[rows, f] <= k
        left_rows, right_rows = rows[mask], rows[~mask]
        feature[node] = f
        threshold[node] = thr
        left[node] = new_node(left_rows)
        right[node] = new_node(right_rows)
        # Right first so the left subtree is expanded (and numbered) first.
        stack.append((right[node], right_rows, depth + 1))
        stack.append((left[node], left_rows, depth + 1))

    return RegressionTree(feature, threshold, left, right, value)
