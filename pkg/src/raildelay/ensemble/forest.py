import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_features, as_xy
from .tree import LEVEL_WISE, TreeConfig, fit_tree


class RandomForestRegressor(BaseEstimator, RegressorMixin):
    """Bagged ensemble of CART trees averaged at prediction time.

    Parameters
    ----------
    n_estimators : int, default=100
    bootstrap : bool, default=True
        Fit each tree on a size-n resample drawn with replacement; otherwise
        every tree sees the full data.
    feature_fraction : float, default=1.0
        Share of features considered at each split.
    max_depth : int, default=0
        0 grows trees until leaves are pure or cannot be split.
    min_samples_leaf : int, default=1
    random_state : int, default=0
    n_jobs : int, default=1
        Trees are independent given their pre-drawn resamples and seeds,
        so the fitted forest does not depend on ``n_jobs``.
    """

    def __init__(self, n_estimators=100, bootstrap=True, feature_fraction=1.0,
                 max_depth=0, min_samples_leaf=1, random_state=0, n_jobs=1):
        self.n_estimators = n_estimators
        self.bootstrap = bootstrap
        self.feature_fraction = feature_fraction
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y):
        X, y = as_xy(X, y)
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if not 0 < self.feature_fraction <= 1:
            raise ValueError("feature_fraction must lie in (0, 1]")
        n = X.shape[0]
        rng = np.random.default_rng(self.random_state)
        jobs = []
        for _ in range(self.n_estimators):
            if self.bootstrap:
                weights = np.bincount(rng.integers(0, n, size=n), minlength=n).astype(float)
            else:
                weights = np.ones(n)
            jobs.append((weights, int(rng.integers(2**31 - 1))))

        config = TreeConfig(self.max_depth, self.min_samples_leaf, 0)
        trees = Parallel(n_jobs=self.n_jobs, prefer="threads")(
            delayed(fit_tree)(X, y, config, seed, self.feature_fraction,
                              growth=LEVEL_WISE, sample_weight=weights)
            for weights, seed in jobs
        )
        self.estimators_ = list(trees)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "estimators_")
        X = as_features(X, self.n_features_in_)
        total = np.zeros(X.shape[0])
        for tree in self.estimators_:
            total += tree.predict(X)
        return total / len(self.estimators_)
