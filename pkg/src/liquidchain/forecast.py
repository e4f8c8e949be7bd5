"""Demand forecasters over 10-day feature windows, and point-forecast post-processing.

Every forecaster takes raw (unscaled) windows of shape (n, 10, 10) and
returns 7-day demand forecasts floored at zero. The learned models own their
feature scaler so the simulation loop never handles scaled values.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import ConfigurationError, DomainError
from .features import HORIZON, MinMaxScaler, N_FEATURES, WINDOW
from .gbt import GradientBoostedRegressor, StackedEnsembles, presort
from .lnn import LiquidRegressor

KINDS = ("hybrid", "gbt", "sma")
SMOOTHING_ALPHA = 0.3


def _check_windows(X, window=WINDOW):
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        X = X[None]
    if X.ndim != 3 or X.shape[1] != window or X.shape[2] != N_FEATURES:
        raise DomainError(f"expected windows of shape (n, {window}, {N_FEATURES}), got {X.shape}")
    return X


def _fit_boosters(Z, Y, n_trees, max_depth, learning_rate, min_samples_leaf):
    sorted_Z = presort(Z)
    boosters = [
        GradientBoostedRegressor(n_trees, max_depth, learning_rate, min_samples_leaf)
        .fit(Z, Y[:, k], sorted_X=sorted_Z)
        for k in range(Y.shape[1])
    ]
    return boosters, StackedEnsembles(boosters)


class _ScaledWindowModel(RegressorMixin, BaseEstimator):
    def _fit_scaler(self, X, scale_rows):
        rows = X.reshape(-1, X.shape[2]) if scale_rows is None else scale_rows
        self.scaler_ = MinMaxScaler().fit(rows)

    def _scale(self, X):
        return self.scaler_.transform(X.reshape(-1, X.shape[2])).reshape(X.shape)


class HybridForecaster(_ScaledWindowModel):
    """Liquid cell feature extractor refined by per-horizon boosted trees.

    The cell is trained first on standardised 7-day targets; its 10 hidden
    states per window are then flattened (10 * n_neurons inputs) and one
    booster per horizon day regresses raw demand on them.
    """

    def __init__(self, n_neurons=64, learning_rate=1e-3, epochs=50, batch_size=8,
                 alpha_base=0.5, kappa=0.1, tau=1.0, weight_decay=1e-4,
                 n_trees=100, max_depth=3, gbt_learning_rate=0.1, min_samples_leaf=2,
                 random_state=0):
        self.n_neurons = n_neurons
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.alpha_base = alpha_base
        self.kappa = kappa
        self.tau = tau
        self.weight_decay = weight_decay
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.gbt_learning_rate = gbt_learning_rate
        self.min_samples_leaf = min_samples_leaf
        self.random_state = random_state

    def fit(self, X, y, scale_rows=None):
        X = _check_windows(X)
        Y = np.asarray(y, dtype=float)
        if len(X) == 0:
            raise DomainError("empty training set")
        self._fit_scaler(X, scale_rows)
        Xs = self._scale(X)
        self.target_mean_ = float(Y.mean())
        sd = float(Y.std())
        self.target_scale_ = sd if sd > 0 else 1.0
        self.lnn_ = LiquidRegressor(
            n_neurons=self.n_neurons, learning_rate=self.learning_rate, epochs=self.epochs,
            batch_size=self.batch_size, alpha_base=self.alpha_base, kappa=self.kappa,
            tau=self.tau, weight_decay=self.weight_decay, random_state=self.random_state,
        ).fit(Xs, (Y - self.target_mean_) / self.target_scale_)
        H = self.lnn_.transform(Xs)
        self.boosters_, self.stacked_ = _fit_boosters(
            H, Y, self.n_trees, self.max_depth, self.gbt_learning_rate, self.min_samples_leaf)
        self.n_gbt_inputs_ = H.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "stacked_")
        H = self.lnn_.transform(self._scale(_check_windows(X)))
        return np.maximum(0.0, self.stacked_.predict(H))

    def checkpoint(self):
        check_is_fitted(self, "stacked_")
        return {
            "kind": "hybrid",
            "params": self.get_params(),
            "scaler": {"min": self.scaler_.data_min_.tolist(), "max": self.scaler_.data_max_.tolist()},
            "target": {"mean": self.target_mean_, "scale": self.target_scale_},
            "lnn": self.lnn_.params_.to_dict(),
            "gbt": [b.to_dict() for b in self.boosters_],
        }


class GBTForecaster(_ScaledWindowModel):
    """Per-horizon boosted trees on the flattened scaled window (100 inputs)."""

    def __init__(self, n_trees=100, max_depth=3, gbt_learning_rate=0.1, min_samples_leaf=2,
                 random_state=0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.gbt_learning_rate = gbt_learning_rate
        self.min_samples_leaf = min_samples_leaf
        self.random_state = random_state

    def fit(self, X, y, scale_rows=None):
        X = _check_windows(X)
        Y = np.asarray(y, dtype=float)
        if len(X) == 0:
            raise DomainError("empty training set")
        self._fit_scaler(X, scale_rows)
        Z = self._scale(X).reshape(len(X), -1)
        self.boosters_, self.stacked_ = _fit_boosters(
            Z, Y, self.n_trees, self.max_depth, self.gbt_learning_rate, self.min_samples_leaf)
        self.n_gbt_inputs_ = Z.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "stacked_")
        X = _check_windows(X)
        return np.maximum(0.0, self.stacked_.predict(self._scale(X).reshape(len(X), -1)))

    def checkpoint(self):
        check_is_fitted(self, "stacked_")
        return {
            "kind": "gbt",
            "params": self.get_params(),
            "scaler": {"min": self.scaler_.data_min_.tolist(), "max": self.scaler_.data_max_.tolist()},
            "gbt": [b.to_dict() for b in self.boosters_],
        }


class SMAForecaster(RegressorMixin, BaseEstimator):
    """Flat forecast equal to the mean demand of the last ``window`` days."""

    def __init__(self, window=10):
        self.window = window

    def fit(self, X=None, y=None, scale_rows=None):
        self.fitted_ = True
        return self

    def predict(self, X):
        X = _check_windows(X)
        if not 1 <= self.window <= X.shape[1]:
            raise ConfigurationError(f"sma window must lie in [1, {X.shape[1]}]")
        level = X[:, -int(self.window):, 0].mean(axis=1)
        return np.maximum(0.0, np.repeat(level[:, None], HORIZON, axis=1))

    def checkpoint(self):
        return {"kind": "sma", "params": self.get_params()}


@dataclass
class ForecasterSpec:
    kind: str = "hybrid"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown forecaster kind {self.kind!r}; choose from {KINDS}")

    def to_dict(self):
        return {"kind": self.kind, "params": dict(self.params)}


def make_forecaster(spec, seed=0):
    params = dict(spec.params)
    if spec.kind == "hybrid":
        return HybridForecaster(random_state=seed, **params)
    if spec.kind == "gbt":
        return GBTForecaster(random_state=seed, **params)
    params.pop("random_state", None)
    return SMAForecaster(**params)


def fit_forecaster(spec, dataset, seed=0, scale_rows=None):
    if len(dataset) == 0:
        raise DomainError("empty window dataset")
    return make_forecaster(spec, seed).fit(dataset.inputs, dataset.targets, scale_rows=scale_rows)


def horizon_weights(horizon=HORIZON):
    """Linear weights from 1.0 on the first day down to 0.5 on the last."""
    k = np.arange(horizon)
    return 1.0 - 0.5 * k / (horizon - 1)


def weight_horizon(raw):
    raw = np.asarray(raw, dtype=float)
    if raw.shape != (HORIZON,):
        raise DomainError(f"expected {HORIZON} horizon values, got shape {raw.shape}")
    w = horizon_weights()
    return float(np.dot(w, raw) / w.sum())


def smooth(previous, value, alpha=SMOOTHING_ALPHA):
    """Exponential smoothing; the first observation initialises the level."""
    if not 0.0 < alpha <= 1.0:
        raise DomainError("smoothing alpha must lie in (0, 1]")
    if previous is None:
        return float(value)
    return alpha * float(value) + (1.0 - alpha) * float(previous)


@dataclass
class Forecast:
    raw: np.ndarray
    weighted_point: float
    smoothed_point: float


class ForecastSmoother:
    """Per-layer smoothing state carried through one simulation."""

    def __init__(self, alpha=SMOOTHING_ALPHA):
        self.alpha = alpha
        self.level: Optional[float] = None

    def __call__(self, raw):
        raw = np.maximum(0.0, np.asarray(raw, dtype=float))
        point = weight_horizon(raw)
        self.level = smooth(self.level, point, self.alpha)
        return Forecast(raw=raw, weighted_point=point, smoothed_point=max(0.0, self.level))
