import struct

import numpy as np
import pytest

from raildelay.data import FEATURE_COLUMNS, DataError, DelayKind, FeatureMatrix, to_features
from raildelay.ensemble import (LEAF_WISE, BoostConfig, ForestConfig,
                                GradientBoostingRegressor, ModelFormatError, ModelPreset,
                                RandomForestRegressor, RegressionTree, TrainedModel,
                                TreeConfig, fit_boosted, fit_forest, fit_preset, fit_tree,
                                load_model, load_model_file, permutation_importance,
                                predict, save_model, save_model_file)
from raildelay.ensemble.persistence import FORMAT_VERSION


@pytest.fixture(scope="module")
def xy():
    rng = np.random.default_rng(21)
    X = rng.normal(size=(300, 10))
    y = 50 + 10 * X[:, 9] + 5 * np.sin(2 * X[:, 0]) + rng.normal(0, 1, 300)
    return X, y


# -- forest -----------------------------------------------------------------

def test_one_tree_no_bootstrap_equals_fit_tree(xy):
    X, y = xy
    model = fit_forest(X, y, ForestConfig(n_trees=1, bootstrap=False))
    np.testing.assert_array_equal(predict(model, X), fit_tree(X, y).predict(X))


def test_one_tree_forest_memorises_distinct_rows():
    rng = np.random.default_rng(1)
    X, y = rng.normal(size=(20, 10)), rng.normal(size=20)
    model = fit_forest(X, y, ForestConfig(n_trees=1, bootstrap=False))
    np.testing.assert_array_equal(predict(model, X), y)


def test_constant_target_forest_and_boost():
    X = np.random.default_rng(2).normal(size=(50, 10))
    y = np.full(50, 42.5)
    for model in (fit_forest(X, y, ForestConfig(n_trees=5)), fit_boosted(X, y)):
        assert np.all(predict(model, X) == 42.5)


def test_forest_is_mean_of_trees(xy):
    X, y = xy
    model = fit_forest(X, y, ForestConfig(n_trees=7, seed=3))
    per_tree = np.array([t.predict(X) for t in model.trees])
    np.testing.assert_array_equal(predict(model, X), per_tree.sum(axis=0) / 7)


def test_forest_of_clones_equals_tree(xy):
    X, y = xy
    tree = fit_tree(X, y, TreeConfig(max_depth=4))
    est = RandomForestRegressor(n_estimators=3)
    est.estimators_, est.n_features_in_ = [tree] * 3, 10
    np.testing.assert_allclose(est.predict(X), tree.predict(X), rtol=0, atol=1e-12)


def test_forest_determinism_and_thread_independence(xy):
    X, y = xy
    a = RandomForestRegressor(n_estimators=8, feature_fraction=0.5, random_state=4).fit(X, y)
    b = RandomForestRegressor(n_estimators=8, feature_fraction=0.5, random_state=4,
                              n_jobs=2).fit(X, y)
    c = RandomForestRegressor(n_estimators=8, feature_fraction=0.5, random_state=5).fit(X, y)
    np.testing.assert_array_equal(a.predict(X), b.predict(X))
    assert not np.array_equal(a.predict(X), c.predict(X))


def test_forest_config_validation():
    with pytest.raises(ValueError):
        ForestConfig(n_trees=0)
    with pytest.raises(ValueError):
        ForestConfig(feature_fraction=0.0)
    with pytest.raises(ValueError):
        fit_forest(np.zeros((1, 10)), [1.0])


# -- boosting ---------------------------------------------------------------

def test_one_full_strength_round_fits_exactly():
    model = fit_boosted([[0.0], [1.0]], [0.0, 10.0],
                        BoostConfig(n_rounds=1, learning_rate=1.0, tree=TreeConfig()))
    np.testing.assert_array_equal(predict(model, [[0.0], [1.0]]), [0.0, 10.0])


def test_one_round_small_learning_rate():
    model = fit_boosted([[0.0], [1.0]], [0.0, 10.0],
                        BoostConfig(n_rounds=1, learning_rate=0.1, tree=TreeConfig()))
    assert model.init == 5.0
    np.testing.assert_allclose(predict(model, [[0.0], [1.0]]), [4.5, 5.5])


def test_zero_trees_give_constant_init():
    est = GradientBoostingRegressor(n_estimators=3, learning_rate=0.3)
    est.init_, est.n_features_in_ = 12.5, 2
    est.estimators_ = [RegressionTree.leaf(0.0)] * 3
    assert np.all(est.predict(np.ones((4, 2))) == 12.5)


def test_boosted_composition_is_exact(xy):
    X, y = xy
    model = fit_boosted(X, y, BoostConfig(n_rounds=12, learning_rate=0.3))
    raw = np.zeros(len(y))
    for tree in model.trees:
        raw += tree.predict(X)
    np.testing.assert_array_equal(predict(model, X), model.init + 0.3 * raw)
    staged = list(model.estimator.staged_predict(X))
    assert len(staged) == 12
    np.testing.assert_array_equal(staged[-1], predict(model, X))


@pytest.mark.parametrize("preset", [p for p in ModelPreset if not p.is_forest])
def test_training_rmse_non_increasing(xy, preset):
    X, y = xy
    model = fit_preset(preset, X, y)
    curve = [np.sqrt(np.mean((y - p) ** 2)) for p in model.estimator.staged_predict(X)]
    assert all(b <= a + 1e-9 for a, b in zip(curve, curve[1:]))


def test_boost_config_validation():
    with pytest.raises(ValueError):
        BoostConfig(n_rounds=0)
    with pytest.raises(ValueError):
        BoostConfig(learning_rate=1.5)
    with pytest.raises(ValueError):
        GradientBoostingRegressor(learning_rate=0).fit([[0.0], [1.0]], [0.0, 1.0])


def test_presets():
    assert [p.value for p in ModelPreset] == [
        "forest100", "boost_level100", "boost_leaf100", "boost_depth6_lr01"]
    forest = ModelPreset.FOREST_100.config(9)
    assert (forest.n_trees, forest.bootstrap, forest.seed) == (100, True, 9)
    level = ModelPreset.BOOST_LEVEL_100.config()
    assert (level.n_rounds, level.learning_rate, level.tree.max_depth) == (100, 0.3, 6)
    leaf = ModelPreset.BOOST_LEAF_100.config()
    assert (leaf.growth, leaf.learning_rate, leaf.tree.max_leaves) == (LEAF_WISE, 0.1, 31)
    d6 = ModelPreset.BOOST_DEPTH6_LR01.config()
    assert (d6.learning_rate, d6.tree.max_depth) == (0.1, 6)
    assert ModelPreset.from_name("BOOST_LEAF_100") is ModelPreset.BOOST_LEAF_100


def test_sklearn_params_round_trip():
    est = RandomForestRegressor(n_estimators=3, max_depth=4)
    clone = RandomForestRegressor(**est.get_params())
    assert clone.get_params() == est.get_params()
    est.set_params(n_estimators=5)
    assert est.n_estimators == 5


def test_predict_checks_columns(small_run):
    X, y, _ = to_features(small_run.pr, DelayKind.TCP)
    model = fit_forest(X, y, ForestConfig(n_trees=2))
    assert model.columns == FEATURE_COLUMNS
    shuffled = FeatureMatrix(X.values, tuple(reversed(FEATURE_COLUMNS)))
    with pytest.raises(DataError, match="columns"):
        predict(model, shuffled)


# -- permutation importance ---------------------------------------------------

def test_importance_zero_for_constant_and_unused_features(xy):
    X, y = xy
    X = X.copy()
    X[:, 3] = 1.0
    model = fit_boosted(X, y, BoostConfig(n_rounds=10, tree=TreeConfig(max_depth=2)))
    used = {int(f) for t in model.trees for f in t.feature if f >= 0}
    imp = permutation_importance(model, X, y, n_repeats=3, seed=1)
    assert imp[3] == 0.0
    for f in set(range(10)) - used:
        assert imp[f] == 0.0
    assert int(np.argmax(imp)) == 9


def test_importance_is_seeded_and_leaves_input_untouched(xy):
    X, y = xy
    model = fit_boosted(X, y, BoostConfig(n_rounds=5))
    before = X.copy()
    a = permutation_importance(model, X, y, n_repeats=2, seed=3)
    b = permutation_importance(model, X, y, n_repeats=2, seed=3)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(X, before)
    with pytest.raises(ValueError):
        permutation_importance(model, X, y, n_repeats=0)


# -- persistence --------------------------------------------------------------

def test_single_leaf_round_trip():
    est = RandomForestRegressor(n_estimators=1)
    est.estimators_, est.n_features_in_ = [RegressionTree.leaf(7.0)], 10
    model = TrainedModel(est, ModelPreset.FOREST_100)
    back = load_model(save_model(model))
    assert np.all(predict(back, np.zeros((3, 10))) == 7.0)


@pytest.mark.parametrize("preset", list(ModelPreset))
def test_round_trip_bit_equal(xy, preset, tmp_path):
    X, y = xy
    model = fit_preset(preset, X, y, seed=2, delay_kind="tcp")
    probe = np.random.default_rng(5).normal(size=(1000, 10)) * 2
    path = tmp_path / "m.rdm"
    save_model_file(model, path)
    back = load_model_file(path)
    np.testing.assert_array_equal(predict(back, probe), predict(model, probe))
    assert back.preset is preset
    assert back.metadata["delay_kind"] == "tcp"
    assert back.estimator.get_params() == model.estimator.get_params()


def test_corrupted_streams(xy):
    X, y = xy
    data = save_model(fit_boosted(X, y, BoostConfig(n_rounds=2)))
    with pytest.raises(ModelFormatError, match="magic|format"):
        load_model(b"XXXX" + data[4:])
    bumped = data[:4] + struct.pack("<H", FORMAT_VERSION + 1) + data[6:]
    with pytest.raises(ModelFormatError, match="version"):
        load_model(bumped)
    with pytest.raises(ModelFormatError):
        load_model(data[: len(data) // 2])
    with pytest.raises(ModelFormatError):
        load_model(data + b"\0")
    with pytest.raises(ModelFormatError):
        load_model(b"")
