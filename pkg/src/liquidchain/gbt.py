"""Gradient-boosted regression trees with squared-error loss, from scratch.

Each round fits a CART regression tree to the current residuals by exact
greedy search over midpoints between consecutive distinct feature values,
then adds it scaled by the learning rate. There is no subsampling, so fits
are fully deterministic. Split-gain ties go to the lowest feature index and
then the lowest threshold.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import DomainError

LEAF = -1


@dataclass
class Tree:
    """Binary tree as parallel node arrays; node 0 is the root.

    Internal nodes send ``x[feature] <= threshold`` to ``left``. Leaves have
    ``feature == -1`` and carry ``value``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self):
        return len(self.feature)

    @property
    def depth(self):
        def _depth(k):
            if self.feature[k] == LEAF:
                return 0
            return 1 + max(_depth(self.left[k]), _depth(self.right[k]))
        return _depth(0)

    def apply(self, X):
        X = np.asarray(X, dtype=float)
        idx = np.zeros(len(X), dtype=np.intp)
        rows = np.arange(len(X))
        while True:
            feat = self.feature[idx]
            internal = feat != LEAF
            if not internal.any():
                return idx
            go_left = X[rows, np.where(internal, feat, 0)] <= self.threshold[idx]
            idx = np.where(internal, np.where(go_left, self.left[idx], self.right[idx]), idx)

    def predict(self, X):
        return self.value[self.apply(X)]

    def to_dict(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            feature=np.asarray(d["feature"], dtype=np.intp),
            threshold=np.asarray(d["threshold"], dtype=float),
            left=np.asarray(d["left"], dtype=np.intp),
            right=np.asarray(d["right"], dtype=np.intp),
            value=np.asarray(d["value"], dtype=float),
        )


def best_split(X_sorted, r_sorted, min_leaf):
    """Best (feature, position, gain) given per-feature sorted values and residuals.

    ``X_sorted`` and ``r_sorted`` have shape (n_features, n). A split at
    position ``k`` puts the first ``k`` sorted rows on the left. Returns
    ``None`` when no valid split exists.
    """
    d, n = X_sorted.shape
    min_leaf = max(int(min_leaf), 1)
    if n < 2 * min_leaf:
        return None
    lo, hi = min_leaf, n - min_leaf + 1  # admissible left-child sizes
    n_left = np.arange(lo, hi, dtype=float)
    mean = r_sorted[0].mean()
    # left sums of mean-centred residuals; SSE reduction = S_L^2 n / (n_L n_R)
    left_sum = np.cumsum(r_sorted, axis=1)[:, lo - 1 : hi - 1] - n_left * mean
    gain = left_sum * left_sum * (n / (n_left * (n - n_left)))
    distinct = X_sorted[:, lo - 1 : hi - 1] < X_sorted[:, lo:hi]
    gain[~distinct] = -1.0
    pos = np.argmax(gain, axis=1)
    per_feature = gain[np.arange(d), pos]
    feat = int(np.argmax(per_feature))
    if per_feature[feat] < 0:
        return None
    return feat, int(pos[feat]) + lo, float(per_feature[feat])


def presort(X):
    """Column-wise sort of ``X``: (row order, sorted values), both (n_features, n)."""
    order = np.argsort(X, axis=0, kind="stable").T.astype(np.int32)
    return order, np.take_along_axis(X.T, order, axis=1)


def fit_tree(X, residuals, max_depth, min_leaf=1, sorted_X=None):
    """Greedy least-squares regression tree on ``residuals``.

    ``sorted_X`` is the output of :func:`presort`; boosting passes it in so the
    sort happens once per fit rather than once per tree.
    """
    X = np.asarray(X, dtype=float)
    r = np.asarray(residuals, dtype=float)
    if X.ndim != 2 or len(X) != len(r) or len(r) < 1:
        raise DomainError("X must be 2-D with one row per residual")
    n, d = X.shape
    order, X_sorted = presort(X) if sorted_X is None else sorted_X

    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(0.0)
        return len(feature) - 1

    # sub / xs: per-feature sorted row ids and values restricted to the node
    def grow(sub, xs, depth):
        node = new_node()
        rows = sub[0]
        r_node = r[rows]
        m = len(rows)
        value[node] = float(np.mean(r_node))
        if depth >= max_depth or m < 2 * min_leaf:
            return node
        split = best_split(xs, r[sub], min_leaf)
        if split is None:
            return node
        feat, pos, gain = split
        if gain <= 1e-12 * float(np.dot(r_node, r_node)):
            return node
        feature[node] = feat
        threshold[node] = 0.5 * (xs[feat, pos - 1] + xs[feat, pos])
        go_left = np.zeros(n, dtype=bool)
        go_left[sub[feat, :pos]] = True
        mask = go_left[sub].ravel()
        flat_sub, flat_xs = sub.ravel(), xs.ravel()
        for side, keep, size in ((left, mask, pos), (right, ~mask, m - pos)):
            idx = np.flatnonzero(keep)
            side[node] = grow(flat_sub.take(idx).reshape(d, size),
                              flat_xs.take(idx).reshape(d, size), depth + 1)
        return node

    grow(order, X_sorted, 0)
    return Tree(
        feature=np.asarray(feature, dtype=np.intp),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=np.intp),
        right=np.asarray(right, dtype=np.intp),
        value=np.asarray(value, dtype=float),
    )


class GradientBoostedRegressor(RegressorMixin, BaseEstimator):
    """First-order residual boosting: ``F_m = F_{m-1} + learning_rate * tree_m``.

    ``train_mse_`` records the training MSE after every round, starting with
    the constant model ``F_0 = mean(y)``.
    """

    def __init__(self, n_estimators=100, max_depth=3, learning_rate=0.1, min_samples_leaf=2):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.min_samples_leaf = min_samples_leaf

    def _validate_params(self):
        if int(self.n_estimators) < 0 or int(self.max_depth) < 1 or int(self.min_samples_leaf) < 1:
            raise DomainError("n_estimators >= 0, max_depth >= 1, min_samples_leaf >= 1 required")
        if not 0.0 < self.learning_rate <= 1.0:
            raise DomainError("learning_rate must lie in (0, 1]")

    def fit(self, X, y, sorted_X=None):
        self._validate_params()
        try:
            X = check_array(X, dtype=float)
        except ValueError as exc:
            raise DomainError(str(exc)) from exc
        y = np.asarray(y, dtype=float).ravel()
        if len(y) != len(X):
            raise DomainError("X and y lengths differ")
        if not np.all(np.isfinite(y)):
            raise DomainError("non-finite targets")
        if sorted_X is None:
            sorted_X = presort(X)
        self.base_prediction_ = float(np.mean(y))
        self.trees_ = []
        F = np.full(len(y), self.base_prediction_)
        self.train_mse_ = [float(np.mean((y - F) ** 2))]
        for _ in range(int(self.n_estimators)):
            tree = fit_tree(X, y - F, self.max_depth, self.min_samples_leaf, sorted_X)
            self.trees_.append(tree)
            F = F + self.learning_rate * tree.predict(X)
            self.train_mse_.append(float(np.mean((y - F) ** 2)))
            if tree.n_nodes == 1:
                break
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "trees_")
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None]
        if X.shape[1] != self.n_features_in_:
            raise DomainError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        out = np.full(len(X), self.base_prediction_)
        for tree in self.trees_:
            out += self.learning_rate * tree.predict(X)
        return out

    def to_dict(self):
        check_is_fitted(self, "trees_")
        return {
            "params": self.get_params(),
            "base_prediction": self.base_prediction_,
            "n_features": self.n_features_in_,
            "trees": [t.to_dict() for t in self.trees_],
        }

    @classmethod
    def from_dict(cls, d):
        model = cls(**d["params"])
        model.base_prediction_ = float(d["base_prediction"])
        model.n_features_in_ = int(d["n_features"])
        model.trees_ = [Tree.from_dict(t) for t in d["trees"]]
        model.train_mse_ = []
        return model


class StackedEnsembles:
    """Several fitted boosters packed into padded node tables.

    Predicting a row walks every tree of every booster simultaneously, which
    is what makes the daily per-window forecast cheap.
    """

    def __init__(self, models):
        self.models = list(models)
        trees = [t for m in self.models for t in m.trees_]
        self.n_outputs = len(self.models)
        self.n_features = self.models[0].n_features_in_
        self.base = np.array([m.base_prediction_ for m in self.models])
        self.owner = np.concatenate(
            [np.full(len(m.trees_), k, dtype=np.intp) for k, m in enumerate(self.models)]
        ) if trees else np.zeros(0, dtype=np.intp)
        self.scale = np.concatenate(
            [np.full(len(m.trees_), m.learning_rate) for m in self.models]
        ) if trees else np.zeros(0)
        width = max((t.n_nodes for t in trees), default=1)
        K = len(trees)
        self.feature = np.full((K, width), LEAF, dtype=np.intp)
        self.threshold = np.zeros((K, width))
        self.left = np.zeros((K, width), dtype=np.intp)
        self.right = np.zeros((K, width), dtype=np.intp)
        self.value = np.zeros((K, width))
        for k, t in enumerate(trees):
            m = t.n_nodes
            self.feature[k, :m] = t.feature
            self.threshold[k, :m] = t.threshold
            self.left[k, :m] = t.left
            self.right[k, :m] = t.right
            self.value[k, :m] = t.value
        self.depth = max((t.depth for t in trees), default=0)

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None]
        if X.shape[1] != self.n_features:
            raise DomainError(f"expected {self.n_features} features, got {X.shape[1]}")
        N, K = len(X), len(self.feature)
        out = np.tile(self.base, (N, 1))
        if K == 0:
            return out
        trees = np.arange(K)[None, :]
        rows = np.arange(N)[:, None]
        idx = np.zeros((N, K), dtype=np.intp)
        for _ in range(self.depth):
            feat = self.feature[trees, idx]
            internal = feat != LEAF
            go_left = X[rows, np.where(internal, feat, 0)] <= self.threshold[trees, idx]
            step = np.where(go_left, self.left[trees, idx], self.right[trees, idx])
            idx = np.where(internal, step, idx)
        contrib = self.value[trees, idx] * self.scale
        for k in range(self.n_outputs):
            out[:, k] += contrib[:, self.owner == k].sum(axis=1)
        return out
