"""Validation-phase profits under increasing demand noise."""

from ..chain import LAYERS
from ..engine import demand_series, run_training_phase, run_validation_phase

DEFAULT_LEVELS = (0.1, 0.5, 1.0)


def robustness_sweep(config, levels=DEFAULT_LEVELS, seeds=None, trained=None, include_clean=True):
    """Cumulative validation profit per (noise level, seed).

    Models are trained once per seed on clean data and reused for every level;
    only validation-day demand is noised. ``trained`` may map seed to an
    existing :class:`~liquidchain.engine.TrainedChain` to skip training.
    Returns a list of rows ``{level, seed, layer_1, layer_2, layer_3, total}``.
    """
    seeds = list(config.seeds if seeds is None else seeds)
    levels = [float(x) for x in levels]
    if include_clean and 0.0 not in levels:
        levels = [0.0] + levels
    trained = dict(trained or {})
    rows = []
    for seed in seeds:
        tc = trained.get(seed) or run_training_phase(config, seed)
        for level in levels:
            demand = demand_series(config, seed, noise_level=level)
            run = run_validation_phase(config, tc, demand=demand)
            row = {"level": level, "seed": seed}
            for i in LAYERS:
                row[f"layer_{i}"] = float(run.layers[i]["cumulative_profit"][-1])
            row["total"] = sum(row[f"layer_{i}"] for i in LAYERS)
            rows.append(row)
    return rows


def summarize(rows):
    """Mean profit per level: level -> {layer_1, layer_2, layer_3, total}."""
    out = {}
    for level in sorted({r["level"] for r in rows}):
        sel = [r for r in rows if r["level"] == level]
        out[level] = {k: sum(r[k] for r in sel) / len(sel)
                      for k in ("layer_1", "layer_2", "layer_3", "total")}
    return out
