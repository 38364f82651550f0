import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_features, as_xy
from .tree import LEAF_WISE, LEVEL_WISE, TreeConfig, fit_tree


class GradientBoostingRegressor(BaseEstimator, RegressorMixin):
    """Stagewise squared-error boosting of CART trees.

    Starts from the target mean and fits each round's tree to the current
    residuals; predictions are ``init_ + learning_rate * sum(trees)``.

    Parameters
    ----------
    n_estimators : int, default=100
        Boosting rounds.
    learning_rate : float, default=0.1
    growth : {"level", "leaf"}, default="level"
    max_depth : int, default=6
        0 for unbounded.
    max_leaves : int, default=0
        Leaf budget per tree, 0 for unbounded.
    min_samples_leaf : int, default=1
    random_state : int, default=0
        Recorded for reproducibility; the fit itself draws no random numbers.
    """

    def __init__(self, n_estimators=100, learning_rate=0.1, growth=LEVEL_WISE,
                 max_depth=6, max_leaves=0, min_samples_leaf=1, random_state=0):
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.growth = growth
        self.max_depth = max_depth
        self.max_leaves = max_leaves
        self.min_samples_leaf = min_samples_leaf
        self.random_state = random_state

    def fit(self, X, y):
        X, y = as_xy(X, y)
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if not 0 < self.learning_rate <= 1:
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.growth not in (LEVEL_WISE, LEAF_WISE):
            raise ValueError(f"growth must be {LEVEL_WISE!r} or {LEAF_WISE!r}")
        config = TreeConfig(self.max_depth, self.min_samples_leaf, self.max_leaves)
        self.init_ = float(np.mean(y))
        raw = np.zeros(y.shape)
        self.estimators_ = []
        for _ in range(self.n_estimators):
            residual = y - (self.init_ + self.learning_rate * raw)
            tree = fit_tree(X, residual, config, self.random_state, 1.0,
                            growth=self.growth)
            raw += tree.predict(X)
            self.estimators_.append(tree)
        self.n_features_in_ = X.shape[1]
        return self

    def _raw_sum(self, X):
        total = np.zeros(X.shape[0])
        for tree in self.estimators_:
            total += tree.predict(X)
        return total

    def predict(self, X):
        check_is_fitted(self, "estimators_")
        X = as_features(X, self.n_features_in_)
        return self.init_ + self.learning_rate * self._raw_sum(X)

    def staged_predict(self, X):
        """Yield predictions after each boosting round."""
        check_is_fitted(self, "estimators_")
        X = as_features(X, self.n_features_in_)
        raw = np.zeros(X.shape[0])
        for tree in self.estimators_:
            raw += tree.predict(X)
            yield self.init_ + self.learning_rate * raw
