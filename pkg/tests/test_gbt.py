import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liquidchain.exceptions import DomainError
from liquidchain.gbt import GradientBoostedRegressor, StackedEnsembles, Tree, fit_tree
from liquidchain.rng import make_rng


def brute_force_stump(X, y):
    """Enumerate every (feature, midpoint) split; return the one with least SSE.

    Ties prefer the lower feature index, then the lower threshold.
    """
    best = None
    for f in range(X.shape[1]):
        values = np.unique(X[:, f])
        for lo, hi in zip(values[:-1], values[1:]):
            thr = (lo + hi) / 2
            left, right = y[X[:, f] <= thr], y[X[:, f] > thr]
            sse = ((left - left.mean()) ** 2).sum() + ((right - right.mean()) ** 2).sum()
            if best is None or sse < best[0] - 1e-9:
                best = (sse, f, thr, left.mean(), right.mean())
    return best


def stump_datasets(n_sets=20, seed=0):
    rng = make_rng(seed)
    for _ in range(n_sets):
        n = int(rng.integers(4, 17))
        d = int(rng.integers(1, 4))
        # integer grid forces duplicate values in some sets
        X = rng.integers(0, 8, size=(n, d)).astype(float)
        y = rng.normal(size=n) * 10
        yield X, y


def stump_matches_oracle(X, y):
    model = GradientBoostedRegressor(n_estimators=1, max_depth=1, learning_rate=1.0,
                                     min_samples_leaf=1).fit(X, y)
    tree = model.trees_[0]
    oracle = brute_force_stump(X, y - y.mean())
    if oracle is None:
        return tree.n_nodes == 1
    _, f, thr, lv, rv = oracle
    return (tree.feature[0] == f and tree.threshold[0] == thr
            and np.isclose(tree.value[tree.left[0]], lv, atol=1e-12)
            and np.isclose(tree.value[tree.right[0]], rv, atol=1e-12))


def test_stump_equals_brute_force():
    assert all(stump_matches_oracle(X, y) for X, y in stump_datasets())


def test_twelve_points_depth_one():
    rng = make_rng(3)
    X, y = rng.random((12, 3)), rng.random(12)
    assert stump_matches_oracle(X, y)


def test_constant_residuals_single_leaf():
    t = fit_tree(np.arange(6.0)[:, None], np.full(6, 3.5), max_depth=3)
    assert t.n_nodes == 1 and t.value[0] == 3.5


def test_unique_perfect_split():
    t = fit_tree(np.array([[0.0], [1.0]]), np.array([0.0, 10.0]), max_depth=1)
    assert t.threshold[0] == 0.5
    assert t.value[t.left[0]] == 0 and t.value[t.right[0]] == 10
    assert list(t.predict([[0.0], [1.0], [0.4], [7.0]])) == [0, 10, 0, 10]


def test_constant_target_predicts_mean():
    m = GradientBoostedRegressor(n_estimators=50).fit(np.arange(10.0)[:, None], np.full(10, 4.0))
    assert np.all(m.predict(np.arange(10.0)[:, None]) == 4.0)
    assert len(m.trees_) == 1 and m.trees_[0].n_nodes == 1


def test_memorising_tree():
    rng = make_rng(4)
    X, y = rng.random((8, 2)), rng.random(8)
    m = GradientBoostedRegressor(n_estimators=1, max_depth=8, learning_rate=1.0,
                                 min_samples_leaf=1).fit(X, y)
    assert m.train_mse_[-1] == pytest.approx(0, abs=1e-24)
    assert np.allclose(m.predict(X[3]), y[3])


def test_empty_ensemble_returns_base():
    m = GradientBoostedRegressor(n_estimators=0).fit([[0.0], [1.0]], [2.0, 4.0])
    assert m.predict([[9.0]])[0] == 3.0


def test_stump_trace():
    m = GradientBoostedRegressor(n_estimators=1, max_depth=1, learning_rate=0.1,
                                 min_samples_leaf=1).fit([[0.0], [1.0]], [0.0, 10.0])
    # base 5, left residual -5 scaled by 0.1
    assert m.predict([[0.0]])[0] == pytest.approx(5 - 0.5)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(5, 40), st.integers(1, 4))
def test_training_mse_non_increasing(seed, n, depth):
    rng = make_rng(seed)
    X, y = rng.random((n, 3)), rng.normal(size=n)
    m = GradientBoostedRegressor(n_estimators=15, max_depth=depth, min_samples_leaf=1).fit(X, y)
    mses = m.train_mse_
    assert all(b <= a + 1e-12 for a, b in zip(mses, mses[1:]))


def test_min_leaf_respected():
    rng = make_rng(5)
    X, y = rng.random((30, 2)), rng.normal(size=30)
    t = fit_tree(X, y, max_depth=4, min_leaf=5)
    counts = np.bincount(t.apply(X), minlength=t.n_nodes)
    leaves = t.feature == -1
    assert np.all(counts[leaves] >= 5)


def test_tree_roundtrip_and_depth():
    rng = make_rng(6)
    X, y = rng.random((20, 2)), rng.normal(size=20)
    m = GradientBoostedRegressor(n_estimators=5, max_depth=3).fit(X, y)
    assert max(t.depth for t in m.trees_) <= 3
    clone = GradientBoostedRegressor.from_dict(m.to_dict())
    assert np.array_equal(clone.predict(X), m.predict(X))
    t = m.trees_[0]
    assert np.array_equal(Tree.from_dict(t.to_dict()).predict(X), t.predict(X))


def test_stacked_matches_individual():
    rng = make_rng(7)
    X = rng.random((25, 4))
    models = [GradientBoostedRegressor(n_estimators=6, max_depth=3).fit(X, rng.normal(size=25))
              for _ in range(3)]
    stacked = StackedEnsembles(models).predict(X)
    for k, m in enumerate(models):
        assert np.allclose(stacked[:, k], m.predict(X), atol=1e-12)


def test_invalid_inputs():
    with pytest.raises(DomainError):
        GradientBoostedRegressor(learning_rate=0).fit([[0.0], [1.0]], [0, 1])
    with pytest.raises(DomainError):
        GradientBoostedRegressor().fit([[0.0], [1.0]], [0, 1, 2])
    with pytest.raises(DomainError):
        GradientBoostedRegressor().fit([[0.0], [1.0]], [0, np.nan])
    m = GradientBoostedRegressor(n_estimators=2).fit([[0.0], [1.0]], [0, 1])
    with pytest.raises(DomainError):
        m.predict([[0.0, 1.0]])
