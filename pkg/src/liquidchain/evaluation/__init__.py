"""Metrics, composite scoring, statistical tests, robustness and reporting."""

from .metrics import MetricSet, bullwhip_ratio, compute_metrics, efficiency
from .scoring import (CUSTOM_WEIGHTS, DEFAULT_WEIGHTS, LAYER_WEIGHTS, ScoreWeights,
                      layer_score, minmax_normalize, score_runs, total_score)
from .stats import anova, holm, welch_ttest

__all__ = [
    "MetricSet", "bullwhip_ratio", "compute_metrics", "efficiency",
    "CUSTOM_WEIGHTS", "DEFAULT_WEIGHTS", "LAYER_WEIGHTS", "ScoreWeights",
    "layer_score", "minmax_normalize", "score_runs", "total_score",
    "anova", "holm", "welch_ttest",
]
