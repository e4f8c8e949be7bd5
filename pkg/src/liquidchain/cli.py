"""``liquidchain`` command-line interface.

Subcommands::

    simulate    run every seed, write <out>/results/<model>/<seed>.json
    tune        hyperparameter search, write <out>/tuning/best_params.json + trials.jsonl
    evaluate    score result files, write <out>/report/{report,scores,...}.csv, stats.json, SVGs
    robustness  noise sweep, write <out>/report/robustness.csv + robustness.svg
    report      re-render SVGs from the CSVs already in <out>/report
    demo        120-day miniature of simulate + evaluate (< 1 min)

Exit codes: 0 success, 1 partial failure (some seeds/trials failed),
2 usage or configuration error. The output root is ``--out``, else the
``LIQUIDCHAIN_OUTPUT`` environment variable, else ``./output``.
"""

import argparse
import glob
import json
import logging
import os
import sys
from dataclasses import replace

from .config import ExperimentConfig, load_config
from .engine import RunFailure, run_experiment
from .evaluation.report import evaluate, render, write_robustness
from .evaluation.robustness import DEFAULT_LEVELS, robustness_sweep
from .exceptions import ConfigurationError, LiquidChainError, TuningError
from .forecast import KINDS, ForecasterSpec
from .tuning import tune

log = logging.getLogger("liquidchain")

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2
OUTPUT_ENV = "LIQUIDCHAIN_OUTPUT"
WEIGHT_CHOICES = {"default": ("default",), "custom": ("custom",), "both": ("default", "custom")}

DEMO_FORECASTER = {"n_neurons": 8, "epochs": 5, "batch_size": 8, "n_trees": 15, "max_depth": 3}


class UsageError(Exception):
    pass


def parse_seeds(text):
    """``"42"``, ``"42,43"`` or ``"42-51"`` (inclusive)."""
    seeds = []
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part[1:]:
                lo, hi = part.split("-", 1)
                seeds.extend(range(int(lo), int(hi) + 1))
            elif part:
                seeds.append(int(part))
    except ValueError:
        raise UsageError(f"bad seed list {text!r}") from None
    if not seeds:
        raise UsageError("empty seed list")
    return seeds


def parse_levels(text):
    try:
        levels = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad noise levels {text!r}") from None
    if not levels or any(x < 0 for x in levels):
        raise UsageError("noise levels must be non-negative numbers")
    return levels


def output_root(args):
    return args.out or os.environ.get(OUTPUT_ENV) or "output"


def build_config(args):
    config = load_config(args.config) if args.config else ExperimentConfig()
    changes = {}
    if getattr(args, "seeds", None):
        changes["seeds"] = parse_seeds(args.seeds)
    if getattr(args, "noise", None) is not None:
        changes["noise_level"] = args.noise
    if getattr(args, "model", None):
        params = config.forecaster.params if args.model == config.forecaster.kind else {}
        changes["forecaster"] = ForecasterSpec(args.model, dict(params))
    return replace(config, **changes) if changes else config


def _writable(path):
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise UsageError(f"output directory {path} is not writable")
    return path


def cmd_simulate(args, config=None):
    config = config or build_config(args)
    out = _writable(os.path.join(output_root(args), "results"))
    results = run_experiment(config, out_dir=out, jobs=args.jobs)
    failed = [r for r in results if isinstance(r, RunFailure)]
    ok = len(results) - len(failed)
    print(f"{config.forecaster.kind}: {ok}/{len(results)} runs written to {out}")
    for f in failed:
        print(f"  seed {f.seed} failed: {f.error}", file=sys.stderr)
    if failed:
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_tune(args):
    config = build_config(args)
    out = _writable(os.path.join(output_root(args), "tuning"))
    seeds = config.seeds if args.per_seed else [config.seeds[0]]
    best, failed = {}, 0
    with open(os.path.join(out, "trials.jsonl"), "w", encoding="utf-8") as log_fh:
        for seed in seeds:
            try:
                res = tune(config, n_trials=args.trials, sampler=args.sampler, seed=seed)
            except TuningError as exc:
                print(f"seed {seed}: {exc}", file=sys.stderr)
                failed += 1
                continue
            for t in res.trials:
                log_fh.write(json.dumps({"seed": seed, **t.to_dict()}, sort_keys=True) + "\n")
                failed += t.status != "ok"
            best[str(seed)] = {"params": res.best_params, "value": res.best_value}
    if not best:
        return EXIT_PARTIAL
    payload = best[str(seeds[0])] if len(seeds) == 1 else {"per_seed": best}
    with open(os.path.join(out, "best_params.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    print(f"best params written to {out}")
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_evaluate(args):
    root = output_root(args)
    results = args.results or os.path.join(root, "results")
    if not os.path.isdir(results):
        raise UsageError(f"results directory {results} does not exist")
    if not glob.glob(os.path.join(results, "*", "*.json")):
        raise UsageError(f"no result files under {results}")
    out = _writable(os.path.join(root, "report"))
    written = evaluate(results, out, schemes=WEIGHT_CHOICES[args.weights])
    for p in written:
        print(p)
    return EXIT_OK


def cmd_robustness(args):
    config = build_config(args)
    levels = parse_levels(args.levels) if args.levels else list(DEFAULT_LEVELS)
    out = _writable(os.path.join(output_root(args), "report"))
    rows = robustness_sweep(config, levels)
    write_robustness(rows, out)
    for p in render(out):
        print(p)
    return EXIT_OK


def cmd_report(args):
    out = os.path.join(output_root(args), "report")
    if not os.path.isdir(out):
        raise UsageError(f"no report directory at {out}; run evaluate first")
    for p in render(out):
        print(p)
    return EXIT_OK


def demo_config(kind, seeds=(42, 43)):
    params = DEMO_FORECASTER if kind == "hybrid" else {}
    return ExperimentConfig(horizon=120, train_days=40, seeds=list(seeds),
                            forecaster=ForecasterSpec(kind, dict(params)))


def cmd_demo(args):
    root = output_root(args)
    results = _writable(os.path.join(root, "results"))
    failed = 0
    for kind in ("hybrid", "sma"):
        runs = run_experiment(demo_config(kind), out_dir=results, jobs=args.jobs)
        failed += sum(isinstance(r, RunFailure) for r in runs)
    written = evaluate(results, _writable(os.path.join(root, "report")),
                       schemes=WEIGHT_CHOICES[args.weights])
    for p in written:
        print(p)
    return EXIT_PARTIAL if failed else EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="YAML experiment configuration")
    common.add_argument("--out", help=f"output root (else ${OUTPUT_ENV}, else ./output)")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="parallel worker processes (default: CPU count)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--model", choices=KINDS, help="forecaster kind (overrides config)")
    run.add_argument("--seeds", help="e.g. 42 | 42,43 | 42-51")
    run.add_argument("--noise", type=float, help="validation demand noise level")

    weights = argparse.ArgumentParser(add_help=False)
    weights.add_argument("--weights", choices=sorted(WEIGHT_CHOICES), default="both")

    p = argparse.ArgumentParser(prog="liquidchain", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common, run], help="run experiments")
    t = sub.add_parser("tune", parents=[common, run], help="hyperparameter search")
    t.add_argument("--trials", type=int, default=10)
    t.add_argument("--sampler", choices=("random", "tpe"), default="random")
    t.add_argument("--per-seed", action="store_true", help="tune separately for every seed")
    e = sub.add_parser("evaluate", parents=[common, weights], help="score result files")
    e.add_argument("--results", help="results directory (default <out>/results)")
    r = sub.add_parser("robustness", parents=[common, run], help="noise sweep")
    r.add_argument("--levels", help="comma-separated noise levels (default 0.1,0.5,1.0)")
    sub.add_parser("report", parents=[common], help="re-render SVGs from existing CSVs")
    sub.add_parser("demo", parents=[common, weights], help="fast end-to-end miniature")
    return p


COMMANDS = {
    "simulate": cmd_simulate, "tune": cmd_tune, "evaluate": cmd_evaluate,
    "robustness": cmd_robustness, "report": cmd_report, "demo": cmd_demo,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigurationError, OSError) as exc:
        print(f"liquidchain {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LiquidChainError as exc:
        print(f"liquidchain {args.command}: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
