"""Load result files and emit report.csv, scores.csv, stats.json and SVG figures.

Column orders are fixed:

* ``report.csv``: model, seed, layer, the six raw metrics, the five
  normalised scored metrics, layer_score (default weights)
* ``scores.csv``: model, n_runs, then ``<scheme>_mean, <scheme>_sd,
  <scheme>_rank`` per requested scheme
* ``profit_curves.csv``: model, layer, day, mean, sd
* ``robustness.csv``: level, seed, layer_1, layer_2, layer_3, total
"""

import csv
import glob
import json
import logging
import os
from collections import defaultdict
from itertools import combinations

import numpy as np

from ..chain import LAYERS, LAYER_NAMES
from ..engine import load_result
from ..exceptions import LiquidChainError
from .metrics import SCORED
from .scoring import SCHEMES, score_runs
from .stats import anova, holm, welch_ttest
from . import svg

log = logging.getLogger(__name__)

METRIC_COLUMNS = ("cumulative_profit", "inventory_turnover", "service_level", "total_cost",
                  "prediction_mae", "order_volatility")
ROBUSTNESS_COLUMNS = ("level", "seed", "layer_1", "layer_2", "layer_3", "total")


def load_results(results_dir):
    """All parseable ``<model>/<seed>.json`` files; malformed ones are skipped with a warning."""
    runs, skipped = [], []
    for path in sorted(glob.glob(os.path.join(results_dir, "*", "*.json"))):
        try:
            runs.append(load_result(path))
        except (ValueError, LiquidChainError, KeyError, TypeError) as exc:
            log.warning("skipping %s: %s", path, exc)
            skipped.append(path)
    runs.sort(key=lambda r: (r.model, r.seed))
    return runs, skipped


def _ranked(means):
    order = sorted(means, key=lambda m: -means[m])
    return {m: k + 1 for k, m in enumerate(order)}


def model_scores(runs, schemes=("default", "custom")):
    """Per-scheme ``{model: [total score per run]}`` plus the metric rows."""
    per_scheme, rows = {}, None
    for scheme in schemes:
        scheme_rows, totals = score_runs(runs, SCHEMES[scheme])
        if rows is None:
            rows = scheme_rows
        by_model = defaultdict(list)
        for (model, _seed), score in sorted(totals.items()):
            by_model[model].append(score)
        per_scheme[scheme] = dict(by_model)
    return per_scheme, rows or []


def statistics(per_scheme):
    out = {}
    for scheme, by_model in per_scheme.items():
        models = sorted(by_model)
        eligible = [m for m in models if len(by_model[m]) >= 2]
        entry = {"pairwise_welch": [], "anova": None}
        if len(eligible) < 2:
            entry["note"] = "fewer than two models with at least two runs; tests skipped"
            out[scheme] = entry
            continue
        pairs = list(combinations(eligible, 2))
        tests = [welch_ttest(by_model[a], by_model[b]) for a, b in pairs]
        adjusted = holm([t.pvalue for t in tests])
        for (a, b), t, padj in zip(pairs, tests, adjusted):
            entry["pairwise_welch"].append({
                "a": a, "b": b, "t": t.statistic, "df": t.df, "p": t.pvalue,
                "p_holm": float(padj), "significant": bool(t.pvalue < 0.05),
            })
        try:
            res = anova([by_model[m] for m in eligible])
            entry["anova"] = {"F": res.statistic, "p": res.pvalue, "df": list(res.df)}
        except LiquidChainError as exc:
            entry["anova"] = {"error": str(exc)}
        entry["post_hoc"] = "pairwise Welch with Holm correction (Tukey HSD not implemented)"
        out[scheme] = entry
    return out


def profit_curves(runs):
    """Mean and sd of cumulative profit per (model, layer) across seeds."""
    curves = {}
    by_model = defaultdict(list)
    for r in runs:
        by_model[r.model].append(r)
    for model, rs in by_model.items():
        for i in LAYERS:
            stack = np.vstack([r.layers[i]["cumulative_profit"] for r in rs])
            curves[(model, i)] = (stack.mean(axis=0), stack.std(axis=0))
    return curves


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def evaluate(results_dir, out_dir, schemes=("default", "custom"), train_days=None):
    """Compute every report artefact; returns the paths written."""
    runs, skipped = load_results(results_dir)
    if not runs:
        raise LiquidChainError(f"no readable result files under {results_dir}")
    os.makedirs(out_dir, exist_ok=True)
    per_scheme, rows = model_scores(runs, schemes)

    report_header = ["model", "seed", "layer", *METRIC_COLUMNS,
                     *[f"norm_{k}" for k in SCORED], "layer_score"]
    write_csv(os.path.join(out_dir, "report.csv"), report_header,
              [[r[k] for k in report_header] for r in rows])

    models = sorted({r.model for r in runs})
    header = ["model", "n_runs"]
    table = {m: [m, len(next(iter(per_scheme.values()))[m])] for m in models}
    for scheme in schemes:
        means = {m: float(np.mean(per_scheme[scheme][m])) for m in models}
        ranks = _ranked(means)
        header += [f"{scheme}_mean", f"{scheme}_sd", f"{scheme}_rank"]
        for m in models:
            table[m] += [means[m], float(np.std(per_scheme[scheme][m])), ranks[m]]
    write_csv(os.path.join(out_dir, "scores.csv"), header, [table[m] for m in models])

    stats = statistics(per_scheme)
    stats["skipped_files"] = skipped
    with open(os.path.join(out_dir, "stats.json"), "w", encoding="utf-8") as fh:
        json.dump(stats, fh, indent=2, sort_keys=True)

    curves = profit_curves(runs)
    start = int(runs[0].config.get("train_days", 0)) if train_days is None else train_days
    curve_rows = []
    for (model, layer), (mean, sd) in sorted(curves.items()):
        for k, (m, s) in enumerate(zip(mean, sd)):
            curve_rows.append([model, layer, start + k, float(m), float(s)])
    write_csv(os.path.join(out_dir, "profit_curves.csv"),
              ["model", "layer", "day", "mean", "sd"], curve_rows)
    return render(out_dir)


def write_robustness(rows, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "robustness.csv")
    write_csv(path, list(ROBUSTNESS_COLUMNS), [[r[k] for k in ROBUSTNESS_COLUMNS] for r in rows])
    return path


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def render(out_dir):
    """Draw SVGs from the CSVs present in ``out_dir``; returns all artefact paths."""
    written = [p for p in (os.path.join(out_dir, n) for n in
                           ("report.csv", "scores.csv", "stats.json", "profit_curves.csv",
                            "robustness.csv")) if os.path.exists(p)]
    curve_path = os.path.join(out_dir, "profit_curves.csv")
    if os.path.exists(curve_path):
        data = defaultdict(lambda: defaultdict(lambda: ([], [], [])))
        for row in _read_csv(curve_path):
            x, m, s = data[int(row["layer"])][row["model"]]
            x.append(float(row["day"]))
            m.append(float(row["mean"]))
            s.append(float(row["sd"]))
        panels = []
        for layer in sorted(data):
            series = {name: tuple(np.asarray(v) for v in xms)
                      for name, xms in data[layer].items()}
            panels.append((f"Layer {layer} ({LAYER_NAMES[layer]})", series))
        path = os.path.join(out_dir, "cumulative_profit.svg")
        svg.band_panels(panels, path)
        written.append(path)
    rob_path = os.path.join(out_dir, "robustness.csv")
    if os.path.exists(rob_path):
        groups = defaultdict(lambda: defaultdict(list))
        for row in _read_csv(rob_path):
            for i in LAYERS:
                groups[f"noise {float(row['level']):g}"][f"layer {i}"].append(float(row[f"layer_{i}"]))
        bars = {lvl: {k: float(np.mean(v)) for k, v in g.items()} for lvl, g in groups.items()}
        path = os.path.join(out_dir, "robustness.svg")
        svg.grouped_bars(bars, path, "Mean cumulative profit under demand noise")
        written.append(path)
    return written
