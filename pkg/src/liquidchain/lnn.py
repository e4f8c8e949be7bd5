"""Liquid time-constant recurrent cell trained by backpropagation through time.

State update for one step, with ``a_t = tanh(W_in x_t + W_rec s_{t-1} + b)``::

    s_t = (1 - alpha_t) s_{t-1} + alpha_t a_t + (dt / tau) (a_t - s_{t-1})

The leak rate ``alpha`` is set once per input window from the window's
volatility and clamped to [0.05, 0.95]. A linear readout maps the final state
to the 7-day horizon.
"""

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import DomainError, NumericError, TrainingError
from .rng import box_muller, make_rng

ALPHA_MIN = 0.05
ALPHA_MAX = 0.95
PARAM_NAMES = ("W_in", "W_rec", "b", "W_out", "b_out")
CHECKPOINT_VERSION = 1


@dataclass
class LnnParams:
    W_in: np.ndarray
    W_rec: np.ndarray
    b: np.ndarray
    W_out: np.ndarray
    b_out: np.ndarray
    alpha_base: float = 0.5
    kappa: float = 0.1
    tau: float = 1.0
    dt: float = 1.0

    def __post_init__(self):
        if self.tau <= 0 or self.dt <= 0:
            raise DomainError("tau and dt must be positive")
        if not 0.0 < self.alpha_base < 1.0:
            raise DomainError("alpha_base must lie in (0, 1)")

    @property
    def n_neurons(self):
        return self.W_in.shape[0]

    @property
    def n_inputs(self):
        return self.W_in.shape[1]

    @property
    def n_outputs(self):
        return self.W_out.shape[0]

    def tensors(self):
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def copy(self):
        arrays = {k: v.copy() for k, v in self.tensors().items()}
        return LnnParams(**arrays, alpha_base=self.alpha_base, kappa=self.kappa,
                         tau=self.tau, dt=self.dt)

    def to_dict(self):
        """Checkpoint form: each tensor as ``{"shape": [...], "data": row-major list}``."""
        return {
            "version": CHECKPOINT_VERSION,
            "scalars": {"alpha_base": self.alpha_base, "kappa": self.kappa,
                        "tau": self.tau, "dt": self.dt},
            "tensors": {
                k: {"shape": list(v.shape), "data": v.ravel(order="C").tolist()}
                for k, v in self.tensors().items()
            },
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("version") != CHECKPOINT_VERSION:
            raise DomainError(f"unsupported checkpoint version {d.get('version')!r}")
        arrays = {
            k: np.asarray(t["data"], dtype=float).reshape(t["shape"])
            for k, t in d["tensors"].items()
        }
        return cls(**arrays, **d["scalars"])


def xavier_normal(rng, fan_in, fan_out, shape):
    std = np.sqrt(2.0 / (fan_in + fan_out))
    return box_muller(rng, int(np.prod(shape)), scale=std).reshape(shape)


def init_xavier(n_inputs, n_neurons, n_outputs=7, seed=0, **scalars):
    """Xavier-normal weights (variance ``2 / (fan_in + fan_out)``), zero biases."""
    rng = make_rng(seed)
    return LnnParams(
        W_in=xavier_normal(rng, n_inputs, n_neurons, (n_neurons, n_inputs)),
        W_rec=xavier_normal(rng, n_neurons, n_neurons, (n_neurons, n_neurons)),
        b=np.zeros(n_neurons),
        W_out=xavier_normal(rng, n_neurons, n_outputs, (n_outputs, n_neurons)),
        b_out=np.zeros(n_outputs),
        **scalars,
    )


def window_volatility(window):
    """Mean over features of the population sd across the window's time steps."""
    window = np.asarray(window, dtype=float)
    return np.std(window, axis=-2).mean(axis=-1)


def adaptive_leak(alpha_base, kappa, volatility):
    return np.clip(alpha_base + kappa * np.asarray(volatility, dtype=float),
                   ALPHA_MIN, ALPHA_MAX)


def activation(state, x, params):
    return np.tanh(x @ params.W_in.T + state @ params.W_rec.T + params.b)


def lnn_update(state, a, alpha, dt_over_tau):
    return (1.0 - alpha) * state + alpha * a + dt_over_tau * (a - state)


def lnn_step(state, x, params, alpha):
    a = activation(state, x, params)
    new = lnn_update(state, a, alpha, params.dt / params.tau)
    if not np.all(np.isfinite(new)):
        raise NumericError("non-finite LNN state; weights have likely exploded")
    return new


def _forward_batch(X, params):
    """Unrolled forward pass over a batch of windows.

    Returns states ``S`` of shape (B, T+1, n) with ``S[:, 0] = 0``,
    activations (B, T, n), leak rates (B,) and predictions (B, n_out).
    """
    B, T, _ = X.shape
    n = params.n_neurons
    alpha = adaptive_leak(params.alpha_base, params.kappa, window_volatility(X))
    c = alpha[:, None] + params.dt / params.tau
    S = np.zeros((B, T + 1, n))
    A = np.empty((B, T, n))
    for t in range(T):
        a = np.tanh(X[:, t] @ params.W_in.T + S[:, t] @ params.W_rec.T + params.b)
        A[:, t] = a
        S[:, t + 1] = S[:, t] + c * (a - S[:, t])
    pred = S[:, T] @ params.W_out.T + params.b_out
    return S, A, alpha, pred


def forward(window, params):
    """Run one window from a zero state; returns (hidden states (T, n), prediction)."""
    window = np.asarray(window, dtype=float)
    if window.ndim != 2 or window.shape[1] != params.n_inputs:
        raise DomainError(f"window must have shape (T, {params.n_inputs})")
    S, _, _, pred = _forward_batch(window[None], params)
    if not np.all(np.isfinite(pred)):
        raise NumericError("non-finite LNN output")
    return S[0, 1:], pred[0]


def loss_and_grads(X, Y, params):
    """Mean squared error over all horizon outputs and its gradients."""
    S, A, alpha, pred = _forward_batch(X, params)
    B, T, _ = X.shape
    diff = pred - Y
    loss = float(np.mean(diff ** 2))
    dpred = 2.0 * diff / diff.size

    grads = {
        "W_out": dpred.T @ S[:, T],
        "b_out": dpred.sum(axis=0),
        "W_in": np.zeros_like(params.W_in),
        "W_rec": np.zeros_like(params.W_rec),
        "b": np.zeros_like(params.b),
    }
    c = alpha[:, None] + params.dt / params.tau
    ds = dpred @ params.W_out
    for t in range(T - 1, -1, -1):
        a = A[:, t]
        dz = c * ds * (1.0 - a * a)
        grads["W_in"] += dz.T @ X[:, t]
        grads["W_rec"] += dz.T @ S[:, t]
        grads["b"] += dz.sum(axis=0)
        ds = (1.0 - c) * ds + dz @ params.W_rec
    return loss, grads


def clip_by_global_norm(grads, max_norm):
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if max_norm is not None and total > max_norm:
        scale = max_norm / total
        grads = {k: g * scale for k, g in grads.items()}
    return grads, total


@dataclass
class AdamW:
    """Adam with decoupled weight decay applied to every tensor."""

    lr: float = 1e-3
    betas: tuple = (0.9, 0.999)
    eps: float = 1e-8
    weight_decay: float = 1e-4
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def step(self, params, grads):
        self.t += 1
        b1, b2 = self.betas
        for name, g in grads.items():
            p = getattr(params, name)
            m = self.m.get(name, np.zeros_like(p))
            v = self.v.get(name, np.zeros_like(p))
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            self.m[name], self.v[name] = m, v
            m_hat = m / (1 - b1 ** self.t)
            v_hat = v / (1 - b2 ** self.t)
            p -= self.lr * self.weight_decay * p
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def train(inputs, targets, params, lr=1e-3, epochs=50, batch_size=8,
          weight_decay=1e-4, clip_norm=1.0, seed=0):
    """Minimise horizon MSE with AdamW; returns (trained copy, per-epoch losses).

    Batches follow a per-epoch permutation drawn from ``seed``, so a fixed seed
    gives a fixed batch order.
    """
    X = np.asarray(inputs, dtype=float)
    Y = np.asarray(targets, dtype=float)
    if len(X) == 0:
        raise DomainError("cannot train on an empty dataset")
    params = params.copy()
    opt = AdamW(lr=lr, weight_decay=weight_decay)
    rng = make_rng(seed)
    history = []
    for epoch in range(int(epochs)):
        order = rng.permutation(len(X))
        total = 0.0
        for start in range(0, len(X), int(batch_size)):
            idx = order[start : start + int(batch_size)]
            loss, grads = loss_and_grads(X[idx], Y[idx], params)
            if not np.isfinite(loss):
                raise TrainingError(
                    f"non-finite loss at epoch {epoch}, batch starting {start}; "
                    f"lr={lr}, last epoch loss={history[-1] if history else None}"
                )
            grads, _ = clip_by_global_norm(grads, clip_norm)
            opt.step(params, grads)
            total += loss * len(idx)
        history.append(total / len(X))
    return params, history


def mse(inputs, targets, params):
    _, _, _, pred = _forward_batch(np.asarray(inputs, dtype=float), params)
    return float(np.mean((pred - np.asarray(targets)) ** 2))


class LiquidRegressor(RegressorMixin, BaseEstimator):
    """sklearn wrapper around the liquid cell.

    ``X`` has shape (n_windows, window, n_features), ``y`` (n_windows, horizon).
    ``transform`` returns the flattened hidden-state trajectories used by the
    hybrid forecaster.
    """

    def __init__(self, n_neurons=64, learning_rate=1e-3, epochs=50, batch_size=8,
                 alpha_base=0.5, kappa=0.1, tau=1.0, dt=1.0, weight_decay=1e-4,
                 clip_norm=1.0, random_state=0):
        self.n_neurons = n_neurons
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.alpha_base = alpha_base
        self.kappa = kappa
        self.tau = tau
        self.dt = dt
        self.weight_decay = weight_decay
        self.clip_norm = clip_norm
        self.random_state = random_state

    def _check_X(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim != 3:
            raise DomainError("expected windows of shape (n, window, n_features)")
        if not np.all(np.isfinite(X)):
            raise DomainError("non-finite input windows")
        return X

    def fit(self, X, y):
        X = self._check_X(X)
        y = np.asarray(y, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        seed = 0 if self.random_state is None else int(self.random_state)
        init = init_xavier(X.shape[2], int(self.n_neurons), y.shape[1], seed=seed,
                           alpha_base=self.alpha_base, kappa=self.kappa,
                           tau=self.tau, dt=self.dt)
        self.params_, self.loss_curve_ = train(
            X, y, init, lr=self.learning_rate, epochs=self.epochs,
            batch_size=self.batch_size, weight_decay=self.weight_decay,
            clip_norm=self.clip_norm, seed=seed + 1,
        )
        self.n_features_in_ = X.shape[2]
        return self

    def predict(self, X):
        check_is_fitted(self, "params_")
        _, _, _, pred = _forward_batch(self._check_X(X), self.params_)
        return pred

    def transform(self, X):
        check_is_fitted(self, "params_")
        S, _, _, _ = _forward_batch(self._check_X(X), self.params_)
        return S[:, 1:].reshape(len(S), -1)
