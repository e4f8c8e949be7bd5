"""Consumer demand generation and robustness-test noise."""

from dataclasses import dataclass, asdict

import numpy as np

from .exceptions import ConfigurationError, DomainError
from .rng import box_muller, make_rng


@dataclass(frozen=True)
class DemandParams:
    base: float = 50.0
    seasonal_amp: float = 20.0
    seasonal_period: float = 90.0
    weekly_amp: float = 5.0
    weekly_period: float = 7.0
    noise_sd: float = 3.0
    horizon: int = 1095
    seed: int = 42

    def __post_init__(self):
        if self.seasonal_period <= 0 or self.weekly_period <= 0:
            raise ConfigurationError("demand periods must be positive")
        if int(self.horizon) < 1:
            raise ConfigurationError("demand horizon must be at least 1 day")
        for name in ("seasonal_amp", "weekly_amp", "noise_sd"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be non-negative")

    def to_dict(self):
        return asdict(self)


def deterministic_demand(params, t):
    """Noise-free demand at day(s) ``t``."""
    t = np.asarray(t, dtype=float)
    return (
        params.base
        + params.seasonal_amp * np.sin(2.0 * np.pi * t / params.seasonal_period)
        + params.weekly_amp * np.sin(2.0 * np.pi * t / params.weekly_period)
    )


def generate_demand(params):
    """Daily consumer demand, floored at zero.

    ``D(t) = base + A_s sin(2 pi t / P_s) + A_w sin(2 pi t / P_w) + g_t`` with
    ``g_t ~ N(0, noise_sd^2)`` drawn from the PCG64 stream seeded by
    ``params.seed``.
    """
    t = np.arange(int(params.horizon))
    noise = box_muller(make_rng(params.seed), len(t), scale=params.noise_sd)
    return np.maximum(0.0, deterministic_demand(params, t) + noise)


def inject_noise(series, noise_level, seed):
    """Add zero-mean Gaussian noise scaled by the series' own spread.

    The noise sd is ``noise_level * sd(series)`` and results are clamped to
    ``[0, 2 * max(series)]``.
    """
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        raise DomainError("cannot add noise to an empty series")
    if noise_level < 0:
        raise DomainError("noise_level must be non-negative")
    scale = float(noise_level) * float(np.std(series))
    if scale == 0.0:
        return series.copy()
    noisy = series + box_muller(make_rng(seed), series.size, scale=scale)
    return np.clip(noisy, 0.0, 2.0 * float(series.max()))


def to_csv(series, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("day,demand\n")
        for day, value in enumerate(series):
            fh.write(f"{day},{float(value)!r}\n")
