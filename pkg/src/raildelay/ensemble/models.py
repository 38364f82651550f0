"""Model presets and the fitted-model container used by the pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from ..data import FEATURE_COLUMNS, FeatureMatrix, check_columns
from .boosting import GradientBoostingRegressor
from .forest import RandomForestRegressor
from .tree import LEAF_WISE, LEVEL_WISE, TreeConfig

__all__ = ["ForestConfig", "BoostConfig", "ModelPreset", "TrainedModel",
           "fit_forest", "fit_boosted", "fit_preset", "predict"]


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    bootstrap: bool = True
    feature_fraction: float = 1.0
    seed: int = 0
    tree: TreeConfig = TreeConfig()

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if not 0 < self.feature_fraction <= 1:
            raise ValueError("feature_fraction must lie in (0, 1]")

    def estimator(self, n_jobs=1) -> RandomForestRegressor:
        return RandomForestRegressor(
            n_estimators=self.n_trees, bootstrap=self.bootstrap,
            feature_fraction=self.feature_fraction, max_depth=self.tree.max_depth,
            min_samples_leaf=self.tree.min_samples_leaf, random_state=self.seed,
            n_jobs=n_jobs)


@dataclass(frozen=True)
class BoostConfig:
    n_rounds: int = 100
    learning_rate: float = 0.1
    growth: str = LEVEL_WISE
    tree: TreeConfig = TreeConfig(max_depth=6)
    seed: int = 0

    def __post_init__(self):
        if self.n_rounds < 1:
            raise ValueError("n_rounds must be >= 1")
        if not 0 < self.learning_rate <= 1:
            raise ValueError("learning_rate must lie in (0, 1]")

    def estimator(self) -> GradientBoostingRegressor:
        return GradientBoostingRegressor(
            n_estimators=self.n_rounds, learning_rate=self.learning_rate,
            growth=self.growth, max_depth=self.tree.max_depth,
            max_leaves=self.tree.max_leaves,
            min_samples_leaf=self.tree.min_samples_leaf, random_state=self.seed)


class ModelPreset(Enum):
    """The four compared configurations, in their declared (tie-break) order."""

    FOREST_100 = "forest100"
    BOOST_LEVEL_100 = "boost_level100"
    BOOST_LEAF_100 = "boost_leaf100"
    BOOST_DEPTH6_LR01 = "boost_depth6_lr01"

    @classmethod
    def from_name(cls, name: str) -> "ModelPreset":
        for preset in cls:
            if name in (preset.value, preset.name, preset.name.lower()):
                return preset
        raise ValueError(
            f"unknown preset {name!r}; expected one of " + ", ".join(p.value for p in cls)
        )

    @property
    def is_forest(self) -> bool:
        return self is ModelPreset.FOREST_100

    def config(self, seed: int = 0):
        if self is ModelPreset.FOREST_100:
            return ForestConfig(n_trees=100, bootstrap=True, seed=seed)
        if self is ModelPreset.BOOST_LEVEL_100:
            return BoostConfig(100, 0.3, LEVEL_WISE, TreeConfig(max_depth=6), seed)
        if self is ModelPreset.BOOST_LEAF_100:
            return BoostConfig(100, 0.1, LEAF_WISE, TreeConfig(max_leaves=31), seed)
        return BoostConfig(100, 0.1, LEVEL_WISE, TreeConfig(max_depth=6), seed)


@dataclass
class TrainedModel:
    """A fitted forest or booster plus what is needed to use it safely later."""

    estimator: object
    preset: Optional[ModelPreset] = None
    columns: Tuple[str, ...] = FEATURE_COLUMNS
    metadata: dict = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return "forest" if isinstance(self.estimator, RandomForestRegressor) else "boosted"

    @property
    def trees(self):
        return self.estimator.estimators_

    @property
    def init(self) -> Optional[float]:
        return getattr(self.estimator, "init_", None)


def _features(X):
    if isinstance(X, FeatureMatrix):
        return X.values, X.columns
    return np.asarray(X, dtype=float), None


def fit_forest(X, y, config: ForestConfig = ForestConfig(), *, preset=None,
               n_jobs=1, **metadata) -> TrainedModel:
    values, columns = _features(X)
    if values.shape[0] < 2:
        raise ValueError("fit_forest needs at least 2 rows")
    est = config.estimator(n_jobs=n_jobs).fit(values, y)
    meta = {"seed": config.seed, "rows": int(values.shape[0]), **metadata}
    return TrainedModel(est, preset, columns or FEATURE_COLUMNS[: values.shape[1]], meta)


def fit_boosted(X, y, config: BoostConfig = BoostConfig(), *, preset=None,
                **metadata) -> TrainedModel:
    values, columns = _features(X)
    if values.shape[0] < 2:
        raise ValueError("fit_boosted needs at least 2 rows")
    est = config.estimator().fit(values, y)
    meta = {"seed": config.seed, "rows": int(values.shape[0]), **metadata}
    return TrainedModel(est, preset, columns or FEATURE_COLUMNS[: values.shape[1]], meta)


def fit_preset(preset: ModelPreset, X, y, seed: int = 0, **metadata) -> TrainedModel:
    config = preset.config(seed)
    if preset.is_forest:
        return fit_forest(X, y, config, preset=preset, **metadata)
    return fit_boosted(X, y, config, preset=preset, **metadata)


def predict(model: TrainedModel, X) -> np.ndarray:
    """Predict for a FeatureMatrix (columns checked) or a bare array."""
    values, columns = _features(X)
    if columns is not None:
        check_columns(model.columns, columns)
    return model.estimator.predict(values)
