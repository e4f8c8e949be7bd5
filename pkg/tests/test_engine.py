import json

import numpy as np
import pytest

from liquidchain.chain import LAYERS
from liquidchain.config import ExperimentConfig
from liquidchain.engine import (SERIES, RunFailure, RunResult, canonical_json, demand_series,
                                load_result, run_experiment, run_single, run_training_phase,
                                run_validation_phase, write_result)
from liquidchain.exceptions import SchemaError
from liquidchain.forecast import ForecasterSpec

from conftest import small_config


def test_default_training_has_203_windows_per_layer():
    trained = run_training_phase(ExperimentConfig(forecaster=ForecasterSpec("sma")), 42)
    assert all(len(trained.datasets[i]) == 203 for i in LAYERS)


def test_pass_through_bootstrap_same_demand_every_layer(sma_config):
    trained = run_training_phase(sma_config, 42)
    d = [trained.histories[i].view("demand") for i in LAYERS]
    assert np.array_equal(d[0], d[1]) and np.array_equal(d[1], d[2])
    assert len(d[0]) == sma_config.train_days


def test_training_deterministic():
    cfg = small_config("hybrid")
    assert run_training_phase(cfg, 42).checkpoints() == run_training_phase(cfg, 42).checkpoints()


def test_validation_length_default_split():
    cfg = ExperimentConfig(forecaster=ForecasterSpec("sma"), seeds=[42])
    run = run_single(cfg, 42)
    assert cfg.validation_days == 876
    for i in LAYERS:
        assert set(run.layers[i]) == set(SERIES)
        assert len(run.layers[i]["profit"]) == 876


def test_cumulative_is_running_sum(sma_config):
    run = run_single(sma_config, 42)
    for i in LAYERS:
        assert np.allclose(run.layers[i]["cumulative_profit"], np.cumsum(run.layers[i]["profit"]))
        assert run.full_cumulative_profit[i] == pytest.approx(run.full_profit_sum[i], rel=1e-9)


def test_noise_only_touches_validation_days(sma_config):
    clean = demand_series(sma_config, 42, noise_level=0.0)
    noisy = demand_series(sma_config, 42, noise_level=0.5)
    T = sma_config.train_days
    assert np.array_equal(clean[:T], noisy[:T])
    assert not np.array_equal(clean[T:], noisy[T:])


def test_validation_demand_cannot_leak_into_training():
    cfg = small_config("hybrid")
    demand = demand_series(cfg, 42)
    altered = demand.copy()
    altered[cfg.train_days:] *= 3
    a = run_training_phase(cfg, 42, demand=demand)
    b = run_training_phase(cfg, 42, demand=altered)
    assert a.checkpoints() == b.checkpoints()


def test_validation_orders_are_batch_multiples(sma_config):
    run = run_single(sma_config, 42)
    for i in LAYERS:
        assert np.all(np.mod(run.layers[i]["orders"], 16) == 0)


def test_mae_first_day_zero_then_abs_error(sma_config):
    run = run_single(sma_config, 42)
    s = run.layers[1]
    assert s["mae"][0] == 0
    assert np.allclose(s["mae"][1:], np.abs(s["forecast_next"][:-1] - s["demand"][1:]))


def test_rerun_canonical_json_identical(tmp_path, sma_config):
    paths = []
    for d in ("a", "b"):
        run = run_single(sma_config, 43)
        paths.append(write_result(run, str(tmp_path / d)))
    docs = [json.load(open(p)) for p in paths]
    assert "meta" in docs[0]
    assert canonical_json(docs[0]) == canonical_json(docs[1])


def test_result_roundtrip(tmp_path, sma_config):
    run = run_single(sma_config, 42)
    back = load_result(write_result(run, str(tmp_path)))
    assert back.model == "sma" and back.seed == 42
    assert np.array_equal(back.layers[3]["profit"], run.layers[3]["profit"])
    assert back.total_profit() == pytest.approx(run.total_profit())


def test_result_schema_errors():
    with pytest.raises(SchemaError):
        RunResult.from_dict({"model": "x"})
    with pytest.raises(SchemaError):
        RunResult.from_dict({"model": "x", "seed": 1, "layers": {str(i): {} for i in LAYERS}})


def test_experiment_one_file_per_seed(tmp_path):
    cfg = small_config("sma", seeds=[42, 43, 44])
    results = run_experiment(cfg, out_dir=str(tmp_path))
    assert len(results) == 3
    assert sorted(p.name for p in (tmp_path / "sma").iterdir()) == ["42.json", "43.json", "44.json"]


def test_experiment_parallel_matches_serial():
    cfg = small_config("sma", seeds=[42, 43])
    serial = run_experiment(cfg, jobs=1)
    parallel = run_experiment(cfg, jobs=2)
    assert [r.total_profit() for r in serial] == [r.total_profit() for r in parallel]


def test_failed_seed_reported(monkeypatch):
    import liquidchain.engine as engine
    from liquidchain.exceptions import NumericError

    real = engine.run_single

    def flaky(config, seed, model_name=None):
        if seed == 43:
            raise NumericError("boom")
        return real(config, seed, model_name)

    monkeypatch.setattr(engine, "run_single", flaky)
    results = run_experiment(small_config("sma", seeds=[42, 43]))
    assert isinstance(results[1], RunFailure) and "boom" in results[1].error
    assert isinstance(results[0], RunResult)


def test_keep_decisions(sma_config):
    trained = run_training_phase(sma_config, 42)
    run = run_validation_phase(sma_config, trained, keep_decisions=True)
    assert len(run.decisions) == 3 * sma_config.validation_days
    assert {"day", "layer", "chosen"} <= set(run.decisions[0])
