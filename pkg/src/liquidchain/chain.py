"""Serial four-echelon supply chain: consumers -> retailer -> distributor -> manufacturer.

Layer 0 is the consumer demand source; layers 1..3 hold inventory, sell to
the layer below, and order from the layer above. Layer 3 orders from an
unbounded outside supplier, and every order arrives in full after
``lead_time`` days. Unmet demand is lost and charged a shortage cost.

Within one day each layer, in order 1 -> 3:

1. receives arrivals due today,
2. observes demand (the order just placed by the layer below),
3. sells ``min(inventory, demand)``,
4. places its order, paying the purchase cost immediately,
5. pays holding cost on its inventory,
6. books profit.
"""

from dataclasses import dataclass, field, asdict, replace
from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np

from .exceptions import ConfigurationError, DomainError

LAYERS = (1, 2, 3)
LAYER_NAMES = {1: "retailer", 2: "distributor", 3: "manufacturer"}


@dataclass(frozen=True)
class ChainConfig:
    n_layers: int = 4
    unit_cost: tuple = (0.0, 30.0, 45.0, 60.0)
    unit_price: tuple = (0.0, 70.0, 100.0, 130.0)
    holding_rate: float = 0.03
    shortage_rate: float = 0.03
    lead_time: int = 1
    initial_inventory: float = 100.0
    batch_size: int = 16
    max_inventory: Optional[float] = None
    # "absolute": rate is currency/unit/day; "fraction_of_unit_cost": rate * unit_cost
    holding_cost_mode: str = "absolute"
    # "end": end-of-day inventory; "average": (post-arrival + end) / 2
    holding_basis: str = "end"

    def __post_init__(self):
        object.__setattr__(self, "unit_cost", tuple(float(c) for c in self.unit_cost))
        object.__setattr__(self, "unit_price", tuple(float(p) for p in self.unit_price))
        if self.n_layers != 4 or len(self.unit_cost) != 4 or len(self.unit_price) != 4:
            raise ConfigurationError("the chain has exactly 4 layers (0..3)")
        for i in LAYERS:
            if self.unit_price[i] <= self.unit_cost[i]:
                raise ConfigurationError(f"layer {i}: unit_price must exceed unit_cost")
        if int(self.lead_time) < 1:
            raise ConfigurationError("lead_time must be >= 1")
        if int(self.batch_size) < 1:
            raise ConfigurationError("batch_size must be >= 1")
        if self.holding_rate < 0 or self.shortage_rate < 0:
            raise ConfigurationError("cost rates must be non-negative")
        if self.initial_inventory < 0:
            raise ConfigurationError("initial_inventory must be non-negative")
        if self.holding_cost_mode not in ("absolute", "fraction_of_unit_cost"):
            raise ConfigurationError(f"unknown holding_cost_mode {self.holding_cost_mode!r}")
        if self.holding_basis not in ("end", "average"):
            raise ConfigurationError(f"unknown holding_basis {self.holding_basis!r}")

    def holding_per_unit(self, layer):
        if self.holding_cost_mode == "absolute":
            return self.holding_rate
        return self.holding_rate * self.unit_cost[layer]

    def shortage_per_unit(self, layer):
        if self.holding_cost_mode == "absolute":
            return self.shortage_rate
        return self.shortage_rate * self.unit_cost[layer]

    def to_dict(self):
        d = asdict(self)
        d["unit_cost"] = list(self.unit_cost)
        d["unit_price"] = list(self.unit_price)
        return d


@dataclass
class LayerState:
    inventory: float
    pipeline: Dict[int, float] = field(default_factory=dict)
    cumulative_profit: float = 0.0

    def in_transit(self):
        return float(sum(self.pipeline.values()))

    def position(self):
        """On-hand plus in-transit inventory."""
        return self.inventory + self.in_transit()

    def copy(self):
        return replace(self, pipeline=dict(self.pipeline))


@dataclass
class LayerDay:
    demand: float
    order: float
    sales: float
    revenue: float
    purchase_cost: float
    holding_cost: float
    shortage_cost: float
    profit: float
    inventory_start: float
    inventory_end: float
    arrivals: float

    @property
    def lost(self):
        return self.demand - self.sales


@dataclass
class DayRecord:
    t: int
    demand0: float
    layers: Dict[int, LayerDay]


def initial_states(config):
    return {i: LayerState(inventory=float(config.initial_inventory)) for i in LAYERS}


def propagate_demand(downstream_orders):
    """Demand seen by layers 1..3 given the orders of layers 0..2.

    Consumers order exactly their demand, so ``D_1 = O_0 = D_0``; upstream,
    ``D_i = O_{i-1}``.
    """
    orders = [float(o) for o in downstream_orders]
    if any(o < 0 for o in orders):
        raise DomainError("orders must be non-negative")
    return orders


def profit(revenue, purchase_cost, holding_cost, shortage_cost):
    return revenue - purchase_cost - holding_cost - shortage_cost


def theoretical_profit(demand, layer, config):
    """Profit under perfect fulfilment with no holding or shortage cost."""
    if layer not in LAYERS:
        raise DomainError("theoretical profit is defined for layers 1..3 only")
    return demand * (config.unit_price[layer] - config.unit_cost[layer])


def holding_cost(layer, inventory_start, inventory_end, config):
    if config.holding_basis == "average":
        basis = 0.5 * (inventory_start + inventory_end)
    else:
        basis = inventory_end
    return config.holding_per_unit(layer) * basis


def shortage_cost(layer, unmet, config):
    return config.shortage_per_unit(layer) * unmet


OrderRule = Callable[[int, LayerState, float, int], float]


def step(states, orders: Union[Sequence[float], OrderRule], demand0, config, t):
    """Advance the chain by one day.

    ``orders`` is either the three orders of layers 1..3, or a callable
    ``rule(layer, state, demand, t) -> order`` invoked after the layer has
    sold (so it sees today's demand and post-sale inventory).

    Returns the new states (inputs are not mutated) and the day's record.
    """
    if demand0 < 0:
        raise DomainError(f"day {t}: negative consumer demand")
    if not callable(orders):
        orders = [float(o) for o in orders]
        if len(orders) != len(LAYERS):
            raise DomainError("expected one order per layer 1..3")
    new_states = {i: states[i].copy() for i in LAYERS}
    records = {}
    downstream_order = float(demand0)
    for i in LAYERS:
        st = new_states[i]
        arrivals = st.pipeline.pop(t, 0.0)
        st.inventory += arrivals
        inv_start = st.inventory

        demand = propagate_demand([downstream_order])[0]
        sales = min(st.inventory, demand)
        st.inventory -= sales
        unmet = demand - sales

        qty = orders(i, st, demand, t) if callable(orders) else orders[i - 1]
        qty = float(qty)
        if qty < 0 or not np.isfinite(qty):
            raise DomainError(f"day {t}, layer {i}: invalid order {qty}")
        if qty > 0:
            due = t + int(config.lead_time)
            st.pipeline[due] = st.pipeline.get(due, 0.0) + qty

        revenue = config.unit_price[i] * sales
        purchase = config.unit_cost[i] * qty
        hold = holding_cost(i, inv_start, st.inventory, config)
        short = shortage_cost(i, unmet, config)
        day_profit = profit(revenue, purchase, hold, short)
        st.cumulative_profit += day_profit

        records[i] = LayerDay(
            demand=demand, order=qty, sales=sales, revenue=revenue,
            purchase_cost=purchase, holding_cost=hold, shortage_cost=short,
            profit=day_profit, inventory_start=inv_start,
            inventory_end=st.inventory, arrivals=arrivals,
        )
        downstream_order = qty
    return new_states, DayRecord(t=t, demand0=float(demand0), layers=records)


def pass_through(layer, state, demand, t):
    """Bootstrap rule: reorder exactly what was just demanded."""
    return demand


def records_to_csv(records, layer, path):
    cols = ["demand", "order", "sales", "revenue", "purchase_cost", "holding_cost",
            "shortage_cost", "profit", "inventory_start", "inventory_end"]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("day," + ",".join(cols) + "\n")
        for rec in records:
            day = rec.layers[layer]
            fh.write(f"{rec.t}," + ",".join(repr(float(getattr(day, c))) for c in cols) + "\n")
