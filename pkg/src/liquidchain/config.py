"""Experiment configuration: dataclass tree plus a YAML file loader.

Example file (every key optional; omitted keys take these defaults)::

    horizon: 1095          # simulated days
    train_days: 219        # bootstrap/training phase length
    seeds: [42, 43, 44, 45, 46, 47, 48, 49, 50, 51]
    noise_level: 0.0       # validation-demand noise, multiple of its sd
    demand:
      base: 50.0
      seasonal_amp: 20.0
      seasonal_period: 90.0
      weekly_amp: 5.0
      weekly_period: 7.0
      noise_sd: 3.0
    chain:
      unit_cost: [0, 30, 45, 60]
      unit_price: [0, 70, 100, 130]
      holding_rate: 0.03
      shortage_rate: 0.03
      lead_time: 1
      initial_inventory: 100
      batch_size: 16
      max_inventory: null
      holding_cost_mode: absolute      # or fraction_of_unit_cost
      holding_basis: end               # or average
    policy:
      safety_stock_base: 10.0
      ss_factor: 1.0
      demand_lookback: 10
      candidate_step: 80.0
      batch_size: 16
      demand_multiplier: 1.5
      lookahead_horizon: 7
      rounding: ceil                   # or nearest
    forecaster:
      kind: hybrid                     # hybrid | gbt | sma
      params: {n_neurons: 64, epochs: 50, n_trees: 100}
"""

from dataclasses import dataclass, field, fields, asdict
from typing import List

import yaml

from .chain import ChainConfig
from .demand import DemandParams
from .exceptions import ConfigurationError
from .features import HORIZON, WINDOW
from .forecast import ForecasterSpec
from .policy import PolicyParams

DEFAULT_SEEDS = tuple(range(42, 52))


@dataclass(frozen=True)
class DemandShape:
    base: float = 50.0
    seasonal_amp: float = 20.0
    seasonal_period: float = 90.0
    weekly_amp: float = 5.0
    weekly_period: float = 7.0
    noise_sd: float = 3.0

    def params(self, horizon, seed):
        return DemandParams(horizon=horizon, seed=seed, **asdict(self))


@dataclass
class ExperimentConfig:
    horizon: int = 1095
    train_days: int = 219
    seeds: List[int] = field(default_factory=lambda: list(DEFAULT_SEEDS))
    noise_level: float = 0.0
    window: int = WINDOW
    forecast_horizon: int = HORIZON
    smoothing_alpha: float = 0.3
    demand: DemandShape = field(default_factory=DemandShape)
    chain: ChainConfig = field(default_factory=ChainConfig)
    policy: PolicyParams = field(default_factory=PolicyParams)
    forecaster: ForecasterSpec = field(default_factory=ForecasterSpec)

    def __post_init__(self):
        if not 0 < self.train_days < self.horizon:
            raise ConfigurationError("train_days must lie strictly between 0 and horizon")
        if self.train_days < self.window + self.forecast_horizon:
            raise ConfigurationError(
                f"train_days must be at least window + forecast_horizon "
                f"({self.window + self.forecast_horizon})")
        if self.window != WINDOW or self.forecast_horizon != HORIZON:
            raise ConfigurationError(f"window/forecast_horizon are fixed at {WINDOW}/{HORIZON}")
        if not self.seeds:
            raise ConfigurationError("seeds must be non-empty")
        if self.noise_level < 0:
            raise ConfigurationError("noise_level must be non-negative")
        if not 0 < self.smoothing_alpha <= 1:
            raise ConfigurationError("smoothing_alpha must lie in (0, 1]")
        self.seeds = [int(s) for s in self.seeds]

    @property
    def validation_days(self):
        return self.horizon - self.train_days

    def to_dict(self):
        return {
            "horizon": self.horizon,
            "train_days": self.train_days,
            "seeds": list(self.seeds),
            "noise_level": self.noise_level,
            "window": self.window,
            "forecast_horizon": self.forecast_horizon,
            "smoothing_alpha": self.smoothing_alpha,
            "demand": asdict(self.demand),
            "chain": self.chain.to_dict(),
            "policy": self.policy.to_dict(),
            "forecaster": self.forecaster.to_dict(),
        }


_SECTIONS = {
    "demand": DemandShape,
    "chain": ChainConfig,
    "policy": PolicyParams,
}


def _build(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigurationError(f"{where}: expected a mapping, got {type(data).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigurationError(f"{where}: unknown field(s) {', '.join(unknown)}")
    try:
        return cls(**data)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{where}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{where}: {exc}") from None


def config_from_dict(data):
    data = dict(data or {})
    kwargs = {}
    for name, cls in _SECTIONS.items():
        if name in data:
            kwargs[name] = _build(cls, data.pop(name), name)
    if "forecaster" in data:
        fc = data.pop("forecaster")
        kwargs["forecaster"] = _build(ForecasterSpec, fc, "forecaster")
    return _build(ExperimentConfig, {**data, **kwargs}, "config")


def load_config(path):
    """Parse a YAML config file; errors name the line (syntax) or field (schema)."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigurationError(f"{path}: invalid YAML{loc}: {exc}") from None
    return config_from_dict(data)


def dump_config(config, path):
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(config.to_dict(), fh, sort_keys=False)
