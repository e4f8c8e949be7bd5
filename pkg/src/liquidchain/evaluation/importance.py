"""Permutation feature importance for window forecasters."""

import numpy as np

from ..features import FEATURE_NAMES
from ..rng import make_rng


def permutation_importance(forecaster, inputs, targets, n_repeats=5, seed=0):
    """Increase in horizon MSE when one feature is shuffled across windows.

    The whole 10-step trajectory of the feature moves together, so temporal
    structure within a window is preserved while its link to the target is
    broken. Returns a dict ``feature name -> mean MSE increase``.
    """
    X = np.asarray(inputs, dtype=float)
    Y = np.asarray(targets, dtype=float)
    baseline = float(np.mean((forecaster.predict(X) - Y) ** 2))
    rng = make_rng(seed)
    scores = {}
    for f in range(X.shape[2]):
        deltas = []
        for _ in range(n_repeats):
            Xp = X.copy()
            Xp[:, :, f] = X[rng.permutation(len(X)), :, f]
            deltas.append(float(np.mean((forecaster.predict(Xp) - Y) ** 2)) - baseline)
        name = FEATURE_NAMES[f] if f < len(FEATURE_NAMES) else f"f{f}"
        scores[name] = float(np.mean(deltas))
    return scores
