"""Hyperparameter search maximising final manufacturer-layer profit.

Parameters are addressed as ``"forecaster.<name>"`` or ``"policy.<name>"``.
Two samplers are available: seeded random search (the default) and a small
TPE-style sampler that models each parameter independently with Parzen
densities over the best and remaining trials.
"""

import math
import time
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

from .config import ExperimentConfig
from .engine import run_single
from .exceptions import ConfigurationError, LiquidChainError, TuningError
from .forecast import ForecasterSpec
from .rng import TUNING_OFFSET, derive_seed, make_rng


@dataclass(frozen=True)
class Int:
    low: int
    high: int
    step: int = 1

    def grid(self):
        return list(range(self.low, self.high + 1, self.step))

    def sample(self, rng):
        return int(rng.choice(self.grid()))

    def to_unit(self, v):
        return 0.0 if self.high == self.low else (v - self.low) / (self.high - self.low)

    def from_unit(self, u):
        g = np.asarray(self.grid())
        return int(g[np.argmin(np.abs(g - (self.low + u * (self.high - self.low))))])


@dataclass(frozen=True)
class Float:
    low: float
    high: float
    log: bool = False

    def _fwd(self, v):
        return math.log(v) if self.log else v

    def sample(self, rng):
        lo, hi = self._fwd(self.low), self._fwd(self.high)
        return self.from_unit(rng.random())

    def to_unit(self, v):
        lo, hi = self._fwd(self.low), self._fwd(self.high)
        return 0.0 if hi == lo else (self._fwd(v) - lo) / (hi - lo)

    def from_unit(self, u):
        lo, hi = self._fwd(self.low), self._fwd(self.high)
        v = lo + min(max(u, 0.0), 1.0) * (hi - lo)
        v = math.exp(v) if self.log else v
        return float(min(max(v, self.low), self.high))


@dataclass(frozen=True)
class Categorical:
    choices: tuple

    def sample(self, rng):
        return self.choices[int(rng.integers(len(self.choices)))]


def default_space(kind):
    space = {"policy.safety_stock_base": Float(5.0, 20.0)}
    trees = {
        "forecaster.n_trees": Int(100, 300),
        "forecaster.max_depth": Int(3, 7),
        "forecaster.gbt_learning_rate": Float(0.01, 0.3, log=True),
    }
    if kind == "hybrid":
        space.update({
            "forecaster.n_neurons": Int(64, 1024, 64),
            "forecaster.learning_rate": Float(1e-5, 1e-3, log=True),
            "forecaster.batch_size": Int(4, 8, 4),
            "forecaster.epochs": Int(50, 100),
            **trees,
        })
    elif kind == "gbt":
        space.update(trees)
    return space


def apply_params(config, params):
    fparams = dict(config.forecaster.params)
    pparams = {}
    for key, value in params.items():
        section, _, name = key.partition(".")
        if section == "forecaster":
            fparams[name] = value
        elif section == "policy":
            pparams[name] = value
        else:
            raise ConfigurationError(f"unknown tuning target {key!r}")
    return replace(
        config,
        forecaster=ForecasterSpec(config.forecaster.kind, fparams),
        policy=replace(config.policy, **pparams),
    )


class RandomSampler:
    def __init__(self, seed):
        self.rng = make_rng(seed)

    def suggest(self, space, history):
        return {name: dist.sample(self.rng) for name, dist in space.items()}


class TPESampler:
    """Independent per-parameter tree-structured Parzen estimator.

    After ``n_startup`` random trials, trials are split at the ``gamma``
    quantile of objective value. For each parameter, ``n_candidates`` draws
    from the good-trial density are scored by ``l(x) / g(x)`` and the best
    is kept.
    """

    def __init__(self, seed, n_startup=3, gamma=0.25, n_candidates=24):
        self.rng = make_rng(seed)
        self.n_startup = n_startup
        self.gamma = gamma
        self.n_candidates = n_candidates

    @staticmethod
    def _parzen(points, x, bandwidth):
        # mixture of Gaussians at observations plus a uniform prior on [0, 1]
        pts = np.asarray(points, dtype=float)
        dens = np.exp(-0.5 * ((x[:, None] - pts[None, :]) / bandwidth) ** 2)
        dens /= bandwidth * math.sqrt(2 * math.pi)
        return (dens.sum(axis=1) + 1.0) / (len(pts) + 1)

    def suggest(self, space, history):
        done = [h for h in history if h.status == "ok"]
        if len(done) < self.n_startup:
            return {name: dist.sample(self.rng) for name, dist in space.items()}
        ranked = sorted(done, key=lambda h: -h.value)
        n_good = max(1, int(math.ceil(self.gamma * len(ranked))))
        good, bad = ranked[:n_good], ranked[n_good:]
        params = {}
        for name, dist in space.items():
            if isinstance(dist, Categorical):
                choices = list(dist.choices)
                lg = np.array([1.0 + sum(h.params[name] == c for h in good) for c in choices])
                bg = np.array([1.0 + sum(h.params[name] == c for h in bad) for c in choices])
                score = (lg / lg.sum()) / (bg / bg.sum())
                params[name] = choices[int(np.argmax(score))]
                continue
            g_pts = [dist.to_unit(h.params[name]) for h in good]
            b_pts = [dist.to_unit(h.params[name]) for h in bad]
            bw = max(0.02, 0.25 / math.sqrt(len(done)))
            centres = self.rng.choice(g_pts, size=self.n_candidates)
            cand = np.clip(centres + bw * self.rng.standard_normal(self.n_candidates), 0.0, 1.0)
            ratio = self._parzen(g_pts, cand, bw) / self._parzen(b_pts or [0.5], cand, bw)
            params[name] = dist.from_unit(float(cand[int(np.argmax(ratio))]))
        return params


@dataclass
class Trial:
    number: int
    params: Dict
    value: Optional[float] = None
    status: str = "ok"
    error: Optional[str] = None
    seconds: float = 0.0

    def to_dict(self):
        return {"number": self.number, "params": self.params, "value": self.value,
                "status": self.status, "error": self.error}


@dataclass
class TuneResult:
    best_params: Dict
    best_value: float
    seed: int
    trials: List[Trial] = field(default_factory=list)

    def to_dict(self):
        return {"best_params": self.best_params, "best_value": self.best_value,
                "seed": self.seed, "trials": [t.to_dict() for t in self.trials]}


def objective(config, params, seed):
    """Final validation-phase cumulative profit of layer 3."""
    run = run_single(apply_params(config, params), seed)
    return float(run.layers[3]["cumulative_profit"][-1])


def tune(config: ExperimentConfig, space=None, n_trials=10, sampler="random", seed=None,
         evaluate=objective):
    """Search ``space`` for ``n_trials`` trials on one run seed (default: the first)."""
    run_seed = config.seeds[0] if seed is None else int(seed)
    space = default_space(config.forecaster.kind) if space is None else space
    sampler_seed = derive_seed(run_seed, TUNING_OFFSET)
    if sampler == "random":
        smp = RandomSampler(sampler_seed)
    elif sampler == "tpe":
        smp = TPESampler(sampler_seed)
    else:
        raise ConfigurationError(f"unknown sampler {sampler!r}")
    trials = []
    for number in range(int(n_trials)):
        params = smp.suggest(space, trials)
        start = time.perf_counter()
        try:
            trials.append(Trial(number, params, evaluate(config, params, run_seed)))
        except LiquidChainError as exc:
            trials.append(Trial(number, params, status="failed", error=str(exc)))
        trials[-1].seconds = time.perf_counter() - start
    ok = [t for t in trials if t.status == "ok"]
    if not ok:
        raise TuningError(f"all {len(trials)} trials failed")
    best = max(ok, key=lambda t: t.value)
    return TuneResult(best.params, best.value, run_seed, trials)


def tune_per_seed(config, **kwargs):
    return {s: tune(config, seed=s, **kwargs) for s in config.seeds}
