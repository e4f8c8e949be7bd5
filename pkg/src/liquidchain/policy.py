"""Greedy daily ordering: safety stock, candidate orders, profit lookahead, batching."""

import math
from dataclasses import dataclass, asdict, field
from typing import List, Optional, Tuple

import numpy as np

from .chain import holding_cost, shortage_cost
from .exceptions import ConfigurationError, DomainError


@dataclass(frozen=True)
class PolicyParams:
    safety_stock_base: float = 10.0
    ss_factor: float = 1.0
    demand_lookback: int = 10
    candidate_step: float = 80.0
    batch_size: int = 16
    demand_multiplier: float = 1.5
    lookahead_horizon: int = 7
    rounding: str = "ceil"  # or "nearest"

    def __post_init__(self):
        for name in ("safety_stock_base", "ss_factor", "demand_lookback", "candidate_step",
                     "batch_size", "demand_multiplier", "lookahead_horizon"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"policy parameter {name} must be positive")
        if self.rounding not in ("ceil", "nearest"):
            raise ConfigurationError(f"unknown rounding mode {self.rounding!r}")

    def to_dict(self):
        return asdict(self)


@dataclass
class OrderDecision:
    candidates: List[Tuple[float, float]]
    best: float
    chosen: float
    forecast_used: float
    safety_stock: float = 0.0

    def to_dict(self):
        return {
            "candidates": [[q, p] for q, p in self.candidates],
            "best": self.best,
            "chosen": self.chosen,
            "forecast_used": self.forecast_used,
            "safety_stock": self.safety_stock,
        }


def safety_stock(base, demand_history, factor=1.0):
    history = np.asarray(demand_history, dtype=float)
    if history.size == 0:
        raise DomainError("safety stock needs at least one day of demand history")
    return float(base + factor * np.std(history))


def candidate_orders(forecast_point, inventory, avg_demand, safety_stock, params,
                     max_inventory=None):
    """Ascending candidate order quantities.

    From the order-up-to lower bound ``forecast + SS - inventory`` up to
    ``multiplier * avg_demand * lookahead - inventory`` in steps of
    ``candidate_step``, with the upper bound itself always included.
    """
    lower = max(0.0, forecast_point + safety_stock - inventory)
    upper = max(lower, params.demand_multiplier * avg_demand * params.lookahead_horizon - inventory)
    if max_inventory is not None:
        upper = min(upper, max(lower, max_inventory - inventory))
    if upper <= lower:
        return [lower]
    n_steps = int(math.ceil((upper - lower) / params.candidate_step))
    qs = [lower + k * params.candidate_step for k in range(n_steps)]
    qs = [q for q in qs if q < upper]
    qs.append(upper)
    return [max(0.0, q) for q in qs]


@dataclass
class Projection:
    revenue: float = 0.0
    purchase_cost: float = 0.0
    holding_cost: float = 0.0
    shortage_cost: float = 0.0
    daily: list = field(default_factory=list)

    @property
    def profit(self):
        return self.revenue - self.purchase_cost - self.holding_cost - self.shortage_cost


def project(candidate, forecasts, state, config, layer, t):
    """Simulate the lookahead horizon after ordering ``candidate`` on day ``t``.

    Starts from ``state`` (post-sale, pre-order) and serves the forecast
    demand path with the chain's cost rules; unmet demand is lost.
    """
    if candidate < 0:
        raise DomainError("candidate order must be non-negative")
    proj = Projection(purchase_cost=config.unit_cost[layer] * candidate)
    pipeline = dict(state.pipeline)
    due = t + int(config.lead_time)
    pipeline[due] = pipeline.get(due, 0.0) + candidate
    inventory = state.inventory
    price = config.unit_price[layer]
    for k, demand in enumerate(np.asarray(forecasts, dtype=float), start=1):
        inventory += pipeline.pop(t + k, 0.0)
        start = inventory
        sales = min(inventory, demand)
        inventory -= sales
        rev = price * sales
        hold = holding_cost(layer, start, inventory, config)
        short = shortage_cost(layer, demand - sales, config)
        proj.revenue += rev
        proj.holding_cost += hold
        proj.shortage_cost += short
        proj.daily.append((sales, rev, hold, short, inventory))
    return proj


def project_profit(candidate, forecasts, state, config, layer, t=0):
    return project(candidate, forecasts, state, config, layer, t).profit


def round_to_batch(quantity, batch_size, mode="ceil"):
    if mode == "nearest":
        return float(batch_size * round(quantity / batch_size))
    return float(batch_size * math.ceil(quantity / batch_size - 1e-12))


def choose_order(candidates, projections, batch_size, rounding="ceil", forecast_used=0.0,
                 ss=0.0):
    """Most profitable candidate (ties to the smaller quantity), rounded to a batch multiple."""
    if len(candidates) == 0:
        raise DomainError("no candidate orders")
    pairs = sorted(zip(candidates, projections), key=lambda qp: qp[0])
    best_q, best_p = pairs[0]
    for q, p in pairs[1:]:
        if p > best_p:
            best_q, best_p = q, p
    chosen = max(0.0, round_to_batch(best_q, batch_size, rounding))
    return OrderDecision(candidates=[(float(q), float(p)) for q, p in pairs], best=float(best_q),
                         chosen=chosen, forecast_used=float(forecast_used), safety_stock=ss)


def decide(forecast, demand_history, state, config, layer, t, params):
    """Full daily decision for one layer.

    ``forecast`` is a :class:`~liquidchain.forecast.Forecast`; the smoothed point
    sets the lower bound and the raw horizon drives the lookahead.
    """
    recent = np.asarray(demand_history, dtype=float)[-int(params.demand_lookback):]
    ss = safety_stock(params.safety_stock_base, recent, params.ss_factor)
    position = state.position()
    cands = candidate_orders(forecast.smoothed_point, position, float(recent.mean()), ss,
                             params, config.max_inventory)
    horizon = forecast.raw[: int(params.lookahead_horizon)]
    profits = [project_profit(q, horizon, state, config, layer, t) for q in cands]
    return choose_order(cands, profits, params.batch_size, params.rounding,
                        forecast.smoothed_point, ss)
