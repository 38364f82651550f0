import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raildelay.ensemble import (LEAF_WISE, DecisionTreeRegressor, RegressionTree,
                                TreeConfig, fit_tree, predict_tree)
from raildelay.ensemble._grower import LEAF

from oracles import best_first_split, greedy_tree_sse, split_gain, sse


def tree_sse(tree, X, y):
    pred = tree.predict(X)
    return float(np.sum((np.asarray(y) - pred) ** 2))


def test_two_point_split():
    tree = fit_tree([[0.0], [1.0]], [0.0, 10.0])
    assert tree.feature[0] == 0
    assert tree.threshold[0] == 0.5
    assert predict_tree(tree, [0.2]) == 0.0
    assert predict_tree(tree, [0.9]) == 10.0


def test_constant_target_is_single_leaf():
    tree = fit_tree([[1.0], [2.0], [3.0]], [7.0, 7.0, 7.0])
    assert tree.node_count == 1
    assert tree.feature[0] == LEAF
    assert predict_tree(tree, [100.0]) == 7.0


def test_single_leaf_tree_predicts_its_value():
    tree = RegressionTree.leaf(7.0)
    assert predict_tree(tree, np.arange(10.0)) == 7.0


def test_boundary_goes_left():
    stump = RegressionTree(
        feature=np.array([0, LEAF, LEAF]), threshold=np.array([0.5, 0.0, 0.0]),
        left=np.array([1, LEAF, LEAF]), right=np.array([2, LEAF, LEAF]),
        value=np.array([5.0, 0.0, 10.0]))
    assert predict_tree(stump, [0.5]) == 0.0
    assert predict_tree(stump, [0.5000001]) == 10.0


def test_midpoint_falls_back_to_lower_value():
    a = 1.0
    b = np.nextafter(a, 2.0)
    tree = fit_tree([[a], [b]], [0.0, 1.0])
    assert tree.threshold[0] == a
    assert predict_tree(tree, [b]) == 1.0


def test_empty_and_mismatched_input():
    with pytest.raises(ValueError):
        fit_tree(np.zeros((0, 2)), np.zeros(0))
    with pytest.raises(ValueError):
        fit_tree(np.zeros((3, 2)), np.zeros(2))
    with pytest.raises(ValueError):
        TreeConfig(min_samples_leaf=0)


def random_small(rng, n=None):
    n = n or int(rng.integers(2, 9))
    # a coarse grid makes duplicate values and tied gains common
    X = rng.integers(0, 5, size=(n, 2)).astype(float)
    y = rng.integers(0, 6, size=n).astype(float)
    return X, y


def test_first_split_matches_exhaustive_search():
    rng = np.random.default_rng(11)
    for _ in range(200):
        X, y = random_small(rng)
        tree = fit_tree(X, y)
        oracle = best_first_split(X.tolist(), y.tolist())
        if oracle is None:
            assert tree.feature[0] == LEAF
            continue
        f, thr, gain = oracle
        assert (tree.feature[0], tree.threshold[0]) == (f, thr)
        got = split_gain(X.tolist(), y.tolist(), list(range(len(y))), tree.feature[0],
                         tree.threshold[0])
        assert abs(got - gain) <= 1e-12 * max(1.0, gain)


def test_full_tree_matches_recursive_greedy_oracle():
    rng = np.random.default_rng(12)
    for _ in range(150):
        X, y = random_small(rng, n=8)
        X += rng.normal(0, 0.01, X.shape)
        y += rng.normal(0, 0.01, y.shape)
        tree = fit_tree(X, y)
        expected = greedy_tree_sse(X.tolist(), y.tolist())
        assert tree_sse(tree, X, y) == pytest.approx(expected, abs=1e-9)


def test_ties_prefer_lowest_feature():
    # both columns separate y perfectly
    X = np.array([[0.0, 0.0], [1.0, 1.0]])
    tree = fit_tree(X, [1.0, 2.0])
    assert tree.feature[0] == 0


def test_ties_prefer_smallest_threshold():
    # splitting at 0.5 or 2.5 gives the same gain on a symmetric target
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    y = np.array([0.0, 5.0, 5.0, 10.0])
    gains = [split_gain(X.tolist(), y.tolist(), [0, 1, 2, 3], 0, t) for t in (0.5, 2.5)]
    assert gains[0] == pytest.approx(gains[1], rel=1e-12)
    assert fit_tree(X, y).threshold[0] == 0.5


def test_leaf_values_are_means_and_memorise_distinct_rows():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(20, 3))
    y = rng.normal(size=20)
    tree = fit_tree(X, y)
    np.testing.assert_array_equal(tree.predict(X), y)


def test_depth_limit():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(200, 4))
    y = X[:, 0] ** 2 + rng.normal(size=200)
    for d in (1, 2, 3, 6):
        tree = fit_tree(X, y, TreeConfig(max_depth=d))
        assert tree.depth <= d
    assert fit_tree(X, y, TreeConfig(max_depth=3)).n_leaves <= 8


def test_min_samples_leaf():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(100, 2))
    y = rng.normal(size=100)
    tree = fit_tree(X, y, TreeConfig(min_samples_leaf=10))
    leaves = tree.feature == LEAF
    assert np.all(tree.weight[leaves] >= 10)


@pytest.mark.parametrize("L", [1, 2, 5, 31])
def test_leaf_wise_leaf_budget(L):
    rng = np.random.default_rng(6)
    X = rng.normal(size=(300, 3))
    y = np.sin(X[:, 0] * 3) + X[:, 1]
    tree = fit_tree(X, y, TreeConfig(max_leaves=L), growth=LEAF_WISE)
    assert tree.n_leaves == L


def test_leaf_wise_stops_when_unattainable():
    X = np.array([[0.0], [1.0], [2.0]])
    tree = fit_tree(X, [1.0, 2.0, 3.0], TreeConfig(max_leaves=31), growth=LEAF_WISE)
    assert tree.n_leaves == 3


def test_leaf_wise_picks_largest_gain_first():
    # the right half has far more variance, so a 3-leaf budget splits it
    X = np.arange(8.0).reshape(-1, 1)
    y = np.array([0, 0.1, 0, 0.1, 100, 100, 200, 200], dtype=float)
    tree = fit_tree(X, y, TreeConfig(max_leaves=3), growth=LEAF_WISE)
    pred = tree.predict(X)
    assert set(pred[4:]) == {100.0, 200.0}
    assert len(set(pred[:4])) == 1


def test_sample_weights_equal_duplication():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(30, 2))
    y = rng.normal(size=30)
    w = rng.integers(0, 4, size=30)
    w[0] = 1
    weighted = fit_tree(X, y, sample_weight=w, config=TreeConfig(max_depth=4))
    dup = fit_tree(np.repeat(X, w, axis=0), np.repeat(y, w), config=TreeConfig(max_depth=4))
    np.testing.assert_allclose(weighted.predict(X), dup.predict(X), rtol=1e-12)


def test_feature_fraction_is_seeded():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(100, 10))
    y = X @ rng.normal(size=10)
    a = fit_tree(X, y, rng=1, feature_fraction=0.3)
    b = fit_tree(X, y, rng=1, feature_fraction=0.3)
    np.testing.assert_array_equal(a.predict(X), b.predict(X))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_tree_invariants(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, 10))
    y = rng.normal(size=40)
    tree = fit_tree(X, y, TreeConfig(max_depth=5))
    internal = tree.feature != LEAF
    assert np.all(tree.feature[internal] < 10)
    assert np.all(np.isfinite(tree.value[~internal]))
    assert tree_sse(tree, X, y) <= sse(y.tolist()) + 1e-9


def test_estimator_api():
    est = DecisionTreeRegressor(max_depth=2)
    assert est.get_params()["max_depth"] == 2
    est.fit([[0.0], [1.0], [2.0]], [0.0, 1.0, 2.0])
    assert est.predict([[0.0]]).shape == (1,)
    with pytest.raises(ValueError):
        est.predict([[0.0, 1.0]])
