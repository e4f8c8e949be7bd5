"""Per-layer feature vectors, [0, 1] scaling and sliding-window datasets."""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import DomainError

FEATURE_NAMES = (
    "demand",
    "order_lag1",
    "order_lag2",
    "inventory_lag1",
    "inventory_lag2",
    "sales_lag1",
    "order_sd_5",
    "demand_sd_5",
    "season",
    "time_norm",
)
N_FEATURES = len(FEATURE_NAMES)
WINDOW = 10
HORIZON = 7
VOLATILITY_WINDOW = 5
SEASON_PERIOD = 90.0


class LayerHistory:
    """Growing daily record of one layer: demand, order, end inventory, sales."""

    fields = ("demand", "order", "inventory", "sales")

    def __init__(self, capacity):
        self.capacity = int(capacity)
        self.length = 0
        for name in self.fields:
            setattr(self, name, np.zeros(self.capacity))

    def append(self, demand, order, inventory, sales):
        if self.length >= self.capacity:
            raise DomainError("history capacity exceeded")
        k = self.length
        self.demand[k] = demand
        self.order[k] = order
        self.inventory[k] = inventory
        self.sales[k] = sales
        self.length += 1

    def view(self, name):
        return getattr(self, name)[: self.length]

    @classmethod
    def from_arrays(cls, demand, order, inventory, sales):
        demand = np.asarray(demand, dtype=float)
        hist = cls(len(demand))
        hist.demand[:] = demand
        hist.order[:] = order
        hist.inventory[:] = inventory
        hist.sales[:] = sales
        hist.length = len(demand)
        return hist


def _lag(series, idx, pad):
    if idx < 0:
        if not pad:
            raise DomainError("lag reaches before the start of history")
        idx = 0
    return series[idx]


def build_feature_vector(history, t, total_days=1095, pad=True):
    """The 10 raw (unscaled) features for one layer at day ``t``.

    ``demand`` is today's demand, which is observed before ordering. The
    volatility features are population standard deviations over days
    ``t-5 .. t-1``; with ``pad`` set, days before 0 repeat day 0.
    """
    if t < 0 or t >= history.length:
        raise DomainError(f"day {t} not covered by history of length {history.length}")
    if not pad and t < 2:
        raise DomainError("lags need t >= 2 when padding is disabled")
    d, o, inv, s = history.demand, history.order, history.inventory, history.sales
    lo = t - VOLATILITY_WINDOW
    if pad:
        idx = np.clip(np.arange(lo, t), 0, None)
    else:
        idx = np.arange(max(lo, 0), t)
    return np.array([
        d[t],
        _lag(o, t - 1, pad),
        _lag(o, t - 2, pad),
        _lag(inv, t - 1, pad),
        _lag(inv, t - 2, pad),
        _lag(s, t - 1, pad),
        np.std(o[idx]),
        np.std(d[idx]),
        np.sin(2.0 * np.pi * t / SEASON_PERIOD),
        t / float(total_days),
    ])


def build_feature_matrix(history, days, total_days=1095):
    return np.vstack([build_feature_vector(history, t, total_days) for t in days])


class MinMaxScaler(TransformerMixin, BaseEstimator):
    """Scale each feature to [0, 1] using the range seen in ``fit``.

    Features that were constant during fit map to 0. Values outside the
    fitted range are not clipped.
    """

    def fit(self, X, y=None):
        X = check_array(X, dtype=float, ensure_min_samples=0)
        if X.shape[0] == 0:
            raise DomainError("cannot fit a scaler on an empty matrix")
        self.data_min_ = X.min(axis=0)
        self.data_max_ = X.max(axis=0)
        self.data_range_ = self.data_max_ - self.data_min_
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "data_min_")
        X = np.asarray(X, dtype=float)
        safe = np.where(self.data_range_ > 0, self.data_range_, 1.0)
        out = (X - self.data_min_) / safe
        return np.where(self.data_range_ > 0, out, 0.0)

    def inverse_transform(self, X):
        check_is_fitted(self, "data_min_")
        X = np.asarray(X, dtype=float)
        return X * self.data_range_ + self.data_min_


@dataclass
class WindowDataset:
    inputs: np.ndarray   # (n, window, n_features)
    targets: np.ndarray  # (n, horizon)
    end_days: np.ndarray  # day index of each window's last input row

    def __len__(self):
        return len(self.inputs)


def make_windows(features, demand, window=WINDOW, horizon=HORIZON, first_day=0):
    """Supervised pairs: ``features[s:s+window]`` -> ``demand[s+window:s+window+horizon]``."""
    features = np.asarray(features, dtype=float)
    demand = np.asarray(demand, dtype=float)
    if len(features) != len(demand):
        raise DomainError("features and demand must have equal length")
    n = len(features) - window - horizon + 1
    if n < 1:
        raise DomainError(
            f"need at least {window + horizon} days for windowing, got {len(features)}"
        )
    starts = np.arange(n)
    inputs = np.stack([features[s : s + window] for s in starts])
    targets = np.stack([demand[s + window : s + window + horizon] for s in starts])
    return WindowDataset(inputs, targets, first_day + starts + window - 1)


def dump_csv(matrix, path, first_day=0):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("day," + ",".join(FEATURE_NAMES) + "\n")
        for k, row in enumerate(np.asarray(matrix)):
            fh.write(f"{first_day + k}," + ",".join(repr(float(v)) for v in row) + "\n")
