"""Regression-tree ensembles: bagged forest and gradient boosting."""

from .boosting import GradientBoostingRegressor
from .forest import RandomForestRegressor
from .inspection import permutation_importance
from .models import (BoostConfig, ForestConfig, ModelPreset, TrainedModel,
                     fit_boosted, fit_forest, fit_preset, predict)
from .persistence import (ModelFormatError, load_model, load_model_file,
                          save_model, save_model_file)
from .tree import (LEAF_WISE, LEVEL_WISE, DecisionTreeRegressor, RegressionTree,
                   TreeConfig, fit_tree, predict_tree)

__all__ = [
    "BoostConfig", "DecisionTreeRegressor", "ForestConfig",
    "GradientBoostingRegressor", "LEAF_WISE", "LEVEL_WISE", "ModelFormatError",
    "ModelPreset", "RandomForestRegressor", "RegressionTree", "TrainedModel",
    "TreeConfig", "fit_boosted", "fit_forest", "fit_preset", "fit_tree",
    "load_model", "load_model_file", "permutation_importance", "predict",
    "predict_tree", "save_model", "save_model_file",
]
