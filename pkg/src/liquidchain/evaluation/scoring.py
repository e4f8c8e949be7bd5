"""Min-max normalisation and weighted composite scores."""

from dataclasses import dataclass
from typing import Dict

import numpy as np

from ..chain import LAYERS
from .metrics import SCORED, compute_metrics


@dataclass(frozen=True)
class ScoreWeights:
    profit: float
    turnover: float
    service: float
    cost: float
    mae: float

    def vector(self):
        return np.array([self.profit, self.turnover, self.service, self.cost, self.mae])


DEFAULT_WEIGHTS = ScoreWeights(0.5, 0.2, 0.2, -0.1, -0.1)
CUSTOM_WEIGHTS = ScoreWeights(0.4, 0.1, 0.3, -0.1, -0.1)
SCHEMES = {"default": DEFAULT_WEIGHTS, "custom": CUSTOM_WEIGHTS}
LAYER_WEIGHTS = {1: 0.4, 2: 0.3, 3: 0.3}


def minmax_normalize(values):
    """``(v - min) / (max - min)``; all zeros when the extrema coincide."""
    v = np.asarray(values, dtype=float)
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)


def layer_score(normalized, weights=DEFAULT_WEIGHTS):
    """Weighted sum of normalised (profit, turnover, service, cost, mae).

    Cost and MAE carry negative weights applied directly to their normalised
    values.
    """
    if isinstance(normalized, dict):
        normalized = [normalized[k] for k in SCORED]
    return float(np.dot(weights.vector(), np.asarray(normalized, dtype=float)))


def total_score(layer_scores, layer_weights=None):
    layer_weights = layer_weights or LAYER_WEIGHTS
    return float(sum(layer_weights[i] * layer_scores[i] for i in layer_weights))


def score_runs(runs, weights=DEFAULT_WEIGHTS):
    """Composite total score for every run.

    Extrema for normalisation are taken across all models, runs and layers
    together. Returns ``(rows, totals)`` where ``rows`` holds the raw and
    normalised metrics per (model, seed, layer) and ``totals`` maps
    ``(model, seed)`` to the total score.
    """
    rows = []
    for run in runs:
        for layer in LAYERS:
            m = compute_metrics(run, layer)
            rows.append({"model": run.model, "seed": run.seed, "layer": layer, **m.to_dict()})
    if not rows:
        return rows, {}
    raw = np.array([[r[k] for k in SCORED] for r in rows])
    norm = np.column_stack([minmax_normalize(raw[:, j]) for j in range(raw.shape[1])])
    per_layer: Dict[tuple, Dict[int, float]] = {}
    for r, nv in zip(rows, norm):
        for k, v in zip(SCORED, nv):
            r[f"norm_{k}"] = float(v)
        r["layer_score"] = layer_score(nv, weights)
        per_layer.setdefault((r["model"], r["seed"]), {})[r["layer"]] = r["layer_score"]
    totals = {key: total_score(scores) for key, scores in per_layer.items()}
    return rows, totals
