import numpy as np

from ..data import FeatureMatrix
from ..metrics import rmse
from .models import predict


def permutation_importance(model, X, y, n_repeats=5, seed=0):
    """Mean RMSE increase when each feature column is shuffled.

    Returns one value per column. A column whose values are all equal, or
    that no split uses, scores exactly 0.
    """
    values = np.array(getattr(X, "values", X), dtype=float)
    y = np.asarray(y, dtype=float)
    if values.shape[0] < 2:
        raise ValueError("permutation importance needs at least 2 rows")
    if n_repeats < 1:
        raise ValueError("n_repeats must be >= 1")
    columns = getattr(X, "columns", None)

    def score(data):
        if columns is not None:
            return rmse(y, predict(model, FeatureMatrix(data, columns)))
        return rmse(y, predict(model, data))

    baseline = score(values)
    rng = np.random.default_rng(seed)
    importances = np.zeros(values.shape[1])
    for f in range(values.shape[1]):
        original = values[:, f].copy()
        deltas = []
        for _ in range(n_repeats):
            values[:, f] = original[rng.permutation(original.shape[0])]
            deltas.append(score(values) - baseline)
        values[:, f] = original
        importances[f] = np.mean(deltas)
    return importances
