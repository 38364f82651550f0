import numpy as np
from sklearn.utils.validation import check_array, check_X_y


def _values(X):
    # FeatureMatrix and pandas frames both expose their array via .values
    return getattr(X, "values", X)


def as_xy(X, y):
    X, y = check_X_y(_values(X), y, dtype=np.float64, y_numeric=True)
    if X.shape[0] < 1:
        raise ValueError("empty input")
    return np.ascontiguousarray(X), np.ascontiguousarray(y, dtype=np.float64)


def as_features(X, n_features=None):
    X = check_array(_values(X), dtype=np.float64)
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"expected {n_features} features, got {X.shape[1]}")
    return np.ascontiguousarray(X)
