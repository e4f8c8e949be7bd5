"""Training/validation phases and multi-seed experiments."""

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .chain import LAYERS, initial_states, pass_through, step
from .demand import generate_demand, inject_noise
from .exceptions import LiquidChainError, NumericError
from .features import LayerHistory, build_feature_vector, make_windows, N_FEATURES
from .forecast import ForecastSmoother, fit_forecaster
from .policy import decide
from .rng import DEMAND_OFFSET, MODEL_OFFSET, NOISE_OFFSET, derive_seed

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SERIES = (
    "demand", "orders", "sales", "inventory", "inventory_start", "revenue",
    "purchase_cost", "holding_cost", "shortage_cost", "profit", "cumulative_profit",
    "mae", "forecast_next", "forecast_weighted", "forecast_smoothed",
)


def demand_series(config, seed, noise_level=None):
    """Consumer demand for one run; noise (if any) touches validation days only."""
    clean = generate_demand(config.demand.params(config.horizon, derive_seed(seed, DEMAND_OFFSET)))
    level = config.noise_level if noise_level is None else noise_level
    if level <= 0:
        return clean
    out = clean.copy()
    out[config.train_days:] = inject_noise(
        clean[config.train_days:], level, derive_seed(seed, NOISE_OFFSET))
    return out


class LayerHistoryLog(LayerHistory):
    """History whose current day is opened with the demand and closed after ordering."""

    def begin_day(self, demand):
        self.append(demand, 0.0, 0.0, 0.0)

    def end_day(self, order, inventory, sales):
        k = self.length - 1
        self.order[k] = order
        self.inventory[k] = inventory
        self.sales[k] = sales


@dataclass
class TrainedChain:
    """Everything the validation phase needs to resume the chain at ``train_days``."""

    seed: int
    forecasters: Dict[int, object]
    histories: Dict[int, LayerHistoryLog]
    features: Dict[int, np.ndarray]
    states: dict
    records: list
    datasets: dict

    def checkpoints(self):
        return {str(i): self.forecasters[i].checkpoint() for i in LAYERS}


def _record_day(histories, rec):
    for i in LAYERS:
        day = rec.layers[i]
        histories[i].begin_day(day.demand)
        histories[i].end_day(day.order, day.inventory_end, day.sales)


def run_training_phase(config, seed, demand=None):
    """Bootstrap ``train_days`` with pass-through ordering and fit one forecaster per layer."""
    if demand is None:
        demand = demand_series(config, seed, noise_level=0.0)
    states = initial_states(config.chain)
    histories = {i: LayerHistoryLog(config.horizon) for i in LAYERS}
    records = []
    for t in range(config.train_days):
        states, rec = step(states, pass_through, demand[t], config.chain, t)
        records.append(rec)
        _record_day(histories, rec)

    features, forecasters, datasets = {}, {}, {}
    for i in LAYERS:
        feats = np.zeros((config.horizon, N_FEATURES))
        for t in range(config.train_days):
            feats[t] = build_feature_vector(histories[i], t, config.horizon)
        features[i] = feats
        train_rows = feats[: config.train_days]
        ds = make_windows(train_rows, histories[i].view("demand"), config.window,
                          config.forecast_horizon)
        datasets[i] = ds
        try:
            forecasters[i] = fit_forecaster(config.forecaster, ds,
                                            seed=derive_seed(seed, MODEL_OFFSET, i),
                                            scale_rows=train_rows)
        except LiquidChainError as exc:
            raise type(exc)(f"layer {i}: {exc}") from exc
    return TrainedChain(seed, forecasters, histories, features, states, records, datasets)


@dataclass
class RunResult:
    model: str
    seed: int
    config: dict
    layers: Dict[int, Dict[str, np.ndarray]]
    demand0: np.ndarray
    full_cumulative_profit: Dict[int, float] = field(default_factory=dict)
    full_profit_sum: Dict[int, float] = field(default_factory=dict)
    decisions: Optional[list] = None

    def series(self, layer, name):
        return self.layers[layer][name]

    def total_profit(self):
        return float(sum(self.layers[i]["cumulative_profit"][-1] for i in LAYERS))

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "model": self.model,
            "seed": self.seed,
            "config": self.config,
            "demand0": self.demand0.tolist(),
            "layers": {
                str(i): {k: np.asarray(v).tolist() for k, v in self.layers[i].items()}
                for i in LAYERS
            },
            "ledger": {
                str(i): {"cumulative_profit": self.full_cumulative_profit[i],
                         "sum_daily_profit": self.full_profit_sum[i]}
                for i in LAYERS
            },
        }

    @classmethod
    def from_dict(cls, d):
        from .exceptions import SchemaError

        try:
            layers = {
                int(i): {k: np.asarray(v, dtype=float) for k, v in series.items()}
                for i, series in d["layers"].items()
            }
            for i in LAYERS:
                missing = [k for k in ("profit", "cumulative_profit", "sales", "demand",
                                       "inventory", "inventory_start", "holding_cost",
                                       "shortage_cost", "mae", "orders") if k not in layers[i]]
                if missing:
                    raise SchemaError(f"layer {i} missing series: {', '.join(missing)}")
            ledger = d.get("ledger", {})
            return cls(
                model=d["model"], seed=int(d["seed"]), config=d.get("config", {}),
                layers=layers, demand0=np.asarray(d.get("demand0", []), dtype=float),
                full_cumulative_profit={int(k): v["cumulative_profit"] for k, v in ledger.items()},
                full_profit_sum={int(k): v["sum_daily_profit"] for k, v in ledger.items()},
            )
        except KeyError as exc:
            raise SchemaError(f"result record missing key {exc}") from None


def run_validation_phase(config, trained, demand=None, model_name=None, keep_decisions=False):
    """Simulate validation days with daily profit-maximising orders."""
    if demand is None:
        demand = demand_series(config, trained.seed)
    model_name = model_name or config.forecaster.kind
    states = {i: s.copy() for i, s in trained.states.items()}
    histories = {}
    for i in LAYERS:
        h = LayerHistoryLog(config.horizon)
        src = trained.histories[i]
        for name in LayerHistory.fields:
            getattr(h, name)[: src.length] = src.view(name)
        h.length = src.length
        histories[i] = h
    features = {i: trained.features[i].copy() for i in LAYERS}
    smoothers = {i: ForecastSmoother(config.smoothing_alpha) for i in LAYERS}
    pending = {i: None for i in LAYERS}  # yesterday's day-ahead forecast
    n_val = config.validation_days
    out = {i: {k: np.zeros(n_val) for k in SERIES} for i in LAYERS}
    decisions = [] if keep_decisions else None
    cumulative = {i: s.cumulative_profit for i, s in states.items()}
    profit_sum = {i: sum(r.layers[i].profit for r in trained.records) for i in LAYERS}
    val_cum = {i: 0.0 for i in LAYERS}
    W = config.window

    for k, t in enumerate(range(config.train_days, config.horizon)):
        day_forecasts = {}

        def rule(layer, state, layer_demand, day):
            hist = histories[layer]
            hist.begin_day(layer_demand)
            features[layer][day] = build_feature_vector(hist, day, config.horizon)
            window = features[layer][day - W + 1 : day + 1]
            raw = trained.forecasters[layer].predict(window)[0]
            fc = smoothers[layer](raw)
            day_forecasts[layer] = fc
            decision = decide(fc, hist.demand[max(0, day - W + 1) : day + 1], state,
                              config.chain, layer, day, config.policy)
            if decisions is not None:
                decisions.append({"day": day, "layer": layer, **decision.to_dict()})
            if log.isEnabledFor(logging.DEBUG):
                log.debug("day %d layer %d: %s", day, layer, decision.to_dict())
            return decision.chosen

        try:
            states, rec = step(states, rule, demand[t], config.chain, t)
        except (FloatingPointError, NumericError) as exc:
            raise NumericError(f"day {t}: {exc}") from exc
        for i in LAYERS:
            day = rec.layers[i]
            histories[i].end_day(day.order, day.inventory_end, day.sales)
            fc = day_forecasts[i]
            val_cum[i] += day.profit
            profit_sum[i] += day.profit
            o = out[i]
            o["demand"][k] = day.demand
            o["orders"][k] = day.order
            o["sales"][k] = day.sales
            o["inventory"][k] = day.inventory_end
            o["inventory_start"][k] = day.inventory_start
            o["revenue"][k] = day.revenue
            o["purchase_cost"][k] = day.purchase_cost
            o["holding_cost"][k] = day.holding_cost
            o["shortage_cost"][k] = day.shortage_cost
            o["profit"][k] = day.profit
            o["cumulative_profit"][k] = val_cum[i]
            o["mae"][k] = 0.0 if pending[i] is None else abs(pending[i] - day.demand)
            o["forecast_next"][k] = fc.raw[0]
            o["forecast_weighted"][k] = fc.weighted_point
            o["forecast_smoothed"][k] = fc.smoothed_point
            pending[i] = fc.raw[0]

    return RunResult(
        model=model_name, seed=trained.seed, config=config.to_dict(), layers=out,
        demand0=np.asarray(demand[config.train_days:], dtype=float),
        full_cumulative_profit={i: states[i].cumulative_profit for i in LAYERS},
        full_profit_sum=profit_sum, decisions=decisions,
    )


def run_single(config, seed, model_name=None):
    trained = run_training_phase(config, seed)
    return run_validation_phase(config, trained, model_name=model_name)


def canonical_json(record):
    """Deterministic serialisation with wall-clock metadata removed."""
    body = {k: v for k, v in record.items() if k != "meta"}
    return json.dumps(body, sort_keys=True, separators=(",", ":"))


def write_result(result, out_dir):
    model_dir = os.path.join(out_dir, result.model)
    os.makedirs(model_dir, exist_ok=True)
    path = os.path.join(model_dir, f"{result.seed}.json")
    record = result.to_dict()
    record["meta"] = {
        "created": datetime.now(timezone.utc).isoformat(),
        "package_version": __version__,
    }
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(record, fh, sort_keys=True)
    os.replace(tmp, path)
    return path


def load_result(path):
    with open(path, encoding="utf-8") as fh:
        return RunResult.from_dict(json.load(fh))


@dataclass
class RunFailure:
    seed: int
    error: str


def _run_seed(args):
    config, seed, model_name = args
    try:
        return run_single(config, seed, model_name)
    except LiquidChainError as exc:
        return RunFailure(seed, f"{type(exc).__name__}: {exc}")


def run_experiment(config, model_name=None, out_dir=None, jobs=1):
    """One independent run per seed. Failed seeds come back as :class:`RunFailure`."""
    tasks = [(config, s, model_name) for s in config.seeds]
    if jobs and jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_seed, tasks))
    else:
        results = [_run_seed(t) for t in tasks]
    for res in results:
        if isinstance(res, RunFailure):
            log.warning("seed %s failed: %s", res.seed, res.error)
        elif out_dir is not None:
            write_result(res, out_dir)
    return results
