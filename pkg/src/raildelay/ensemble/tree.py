"""CART regression trees grown by greedy SSE reduction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._grower import LEAF, apply_tree, grow_tree
from ._validation import as_features, as_xy

__all__ = ["TreeConfig", "RegressionTree", "fit_tree", "predict_tree",
           "DecisionTreeRegressor", "LEVEL_WISE", "LEAF_WISE"]

LEVEL_WISE = "level"
LEAF_WISE = "leaf"


@dataclass(frozen=True)
class TreeConfig:
    """Growth limits. ``max_depth`` and ``max_leaves`` of 0 mean unbounded."""

    max_depth: int = 0
    min_samples_leaf: int = 1
    max_leaves: int = 0

    def __post_init__(self):
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.max_depth < 0 or self.max_leaves < 0:
            raise ValueError("max_depth and max_leaves must be >= 0")


@dataclass(frozen=True, eq=False)
class RegressionTree:
    """Flat node arrays; ``feature == -1`` marks a leaf.

    Rows descend left when ``row[feature] <= threshold``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    weight: Optional[np.ndarray] = None
    impurity: Optional[np.ndarray] = None

    @property
    def node_count(self) -> int:
        return int(self.feature.shape[0])

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == LEAF))

    @property
    def depth(self) -> int:
        depths = np.zeros(self.node_count, dtype=int)
        for node in range(self.node_count):
            if self.feature[node] != LEAF:
                depths[self.left[node]] = depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def predict(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=float)
        return apply_tree(self.feature, self.threshold, self.left, self.right,
                          self.value, X)

    @classmethod
    def leaf(cls, value: float) -> "RegressionTree":
        return cls(
            feature=np.array([LEAF], dtype=np.int64),
            threshold=np.zeros(1),
            left=np.array([LEAF], dtype=np.int64),
            right=np.array([LEAF], dtype=np.int64),
            value=np.array([float(value)]),
        )


def fit_tree(X, y, config: TreeConfig = TreeConfig(), rng=None,
             feature_fraction: float = 1.0, *, growth: str = LEVEL_WISE,
             sample_weight=None) -> RegressionTree:
    """Grow a single tree on ``(X, y)``.

    At every node the (feature, threshold) pair with the largest SSE decrease
    is chosen among midpoints of consecutive distinct values; ties go to the
    lowest feature index, then the smallest threshold. ``rng`` (a seed or
    ``numpy.random.Generator``) only matters when ``feature_fraction < 1``.
    """
    X, y = as_xy(X, y)
    if not 0 < feature_fraction <= 1:
        raise ValueError("feature_fraction must lie in (0, 1]")
    if growth not in (LEVEL_WISE, LEAF_WISE):
        raise ValueError(f"growth must be {LEVEL_WISE!r} or {LEAF_WISE!r}")
    if sample_weight is None:
        w = np.ones(X.shape[0])
    else:
        w = np.asarray(sample_weight, dtype=float)
        if w.shape != y.shape or np.any(w < 0) or not np.any(w > 0):
            raise ValueError("sample_weight must be non-negative with a positive entry")
    n_features = X.shape[1]
    n_sub = max(1, int(round(feature_fraction * n_features)))
    seed = np.random.default_rng(rng).integers(2**31 - 1) if n_sub < n_features else 0
    arrays = grow_tree(X, y, w, config.max_depth, config.min_samples_leaf,
                       config.max_leaves, growth == LEAF_WISE, n_sub, int(seed))
    return RegressionTree(*arrays)


def predict_tree(tree: RegressionTree, row) -> float:
    """Value of the leaf reached by ``row``."""
    row = np.asarray(row, dtype=float).reshape(1, -1)
    return float(tree.predict(row)[0])


class DecisionTreeRegressor(BaseEstimator, RegressorMixin):
    """Single CART regressor with the ensemble's split conventions.

    Parameters
    ----------
    max_depth : int, default=0
        Depth limit, 0 for unbounded.
    min_samples_leaf : int, default=1
    max_leaves : int, default=0
        Leaf budget, 0 for unbounded.
    growth : {"level", "leaf"}, default="level"
        Expand nodes breadth-first, or always split the leaf with the
        largest gain (only differs from level-wise under a leaf budget).
    feature_fraction : float, default=1.0
        Share of features drawn at random for each split search.
    random_state : int or None
    """

    def __init__(self, max_depth=0, min_samples_leaf=1, max_leaves=0,
                 growth=LEVEL_WISE, feature_fraction=1.0, random_state=None):
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_leaves = max_leaves
        self.growth = growth
        self.feature_fraction = feature_fraction
        self.random_state = random_state

    def fit(self, X, y, sample_weight=None):
        X, y = as_xy(X, y)
        config = TreeConfig(self.max_depth, self.min_samples_leaf, self.max_leaves)
        self.tree_ = fit_tree(X, y, config, self.random_state, self.feature_fraction,
                              growth=self.growth, sample_weight=sample_weight)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "tree_")
        return self.tree_.predict(as_features(X, self.n_features_in_))
