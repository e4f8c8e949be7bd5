"""Per-layer performance metrics computed from a run's daily series."""

from dataclasses import dataclass, asdict

import numpy as np

from ..chain import theoretical_profit
from ..exceptions import DegenerateInputError, SchemaError

TURNOVER_EPS = 1e-9
SCORED = ("cumulative_profit", "inventory_turnover", "service_level", "total_cost",
          "prediction_mae")


@dataclass
class MetricSet:
    cumulative_profit: float
    inventory_turnover: float
    service_level: float
    total_cost: float
    prediction_mae: float
    order_volatility: float

    def to_dict(self):
        return asdict(self)


def _series(run, layer, name):
    try:
        return np.asarray(run.layers[layer][name], dtype=float)
    except KeyError:
        raise SchemaError(f"run is missing series {name!r} for layer {layer}") from None


def daily_turnover(sales, inventory_start, inventory_end):
    avg_inv = 0.5 * (np.asarray(inventory_start) + np.asarray(inventory_end))
    return np.asarray(sales) / np.maximum(TURNOVER_EPS, avg_inv)


def daily_service(sales, demand):
    sales, demand = np.asarray(sales, dtype=float), np.asarray(demand, dtype=float)
    out = np.ones_like(demand)
    served = demand > 0
    out[served] = sales[served] / demand[served]
    return out


def nonzero_mean(values):
    values = np.abs(np.asarray(values, dtype=float))
    nz = values[values != 0]
    return float(nz.mean()) if nz.size else 0.0


def compute_metrics(run, layer):
    """Scalar metrics for one layer of one run.

    Turnover and service level are means of daily ratios; a zero-demand day
    counts as fully served. MAE averages only the non-zero daily absolute
    errors of the day-ahead forecast.
    """
    sales = _series(run, layer, "sales")
    demand = _series(run, layer, "demand")
    return MetricSet(
        cumulative_profit=float(_series(run, layer, "cumulative_profit")[-1]),
        inventory_turnover=float(np.mean(daily_turnover(
            sales, _series(run, layer, "inventory_start"), _series(run, layer, "inventory")))),
        service_level=float(np.mean(daily_service(sales, demand))),
        total_cost=float(np.sum(_series(run, layer, "shortage_cost"))
                         + np.sum(_series(run, layer, "holding_cost"))),
        prediction_mae=nonzero_mean(_series(run, layer, "mae")),
        order_volatility=float(np.std(_series(run, layer, "orders"))),
    )


def efficiency(profit, demand, layer, config, window=7):
    """Daily realised/theoretical profit ratio and its trailing moving average.

    ``0/0`` (and any zero theoretical profit) gives 0. The moving average is
    NaN for the first ``window - 1`` days.
    """
    profit = np.asarray(profit, dtype=float)
    demand = np.asarray(demand, dtype=float)
    if profit.shape != demand.shape:
        raise ValueError("profit and demand series must have equal length")
    theo = theoretical_profit(demand, layer, config)
    eff = np.zeros_like(profit)
    nz = theo != 0
    eff[nz] = profit[nz] / theo[nz]
    ma = np.full_like(eff, np.nan)
    if len(eff) >= window:
        c = np.cumsum(np.concatenate([[0.0], eff]))
        ma[window - 1:] = (c[window:] - c[:-window]) / window
    return eff, ma


def bullwhip_ratio(orders, demand0):
    """Var(orders) / Var(consumer demand)."""
    var_d = float(np.var(np.asarray(demand0, dtype=float)))
    if var_d == 0:
        raise DegenerateInputError("consumer demand has zero variance")
    return float(np.var(np.asarray(orders, dtype=float))) / var_d
