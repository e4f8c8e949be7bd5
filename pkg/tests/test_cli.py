import json
import os

import pytest
import yaml

from liquidchain.cli import main, parse_levels, parse_seeds, UsageError


@pytest.fixture
def cfg_file(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text(yaml.safe_dump({"horizon": 120, "train_days": 40,
                                    "forecaster": {"kind": "sma"}}))
    return str(path)


def test_seed_and_level_parsing():
    assert parse_seeds("42") == [42]
    assert parse_seeds("42,44") == [42, 44]
    assert parse_seeds("42-45") == [42, 43, 44, 45]
    with pytest.raises(UsageError):
        parse_seeds("x")
    assert parse_levels("0.1,0.5") == [0.1, 0.5]
    with pytest.raises(UsageError):
        parse_levels("-1")


def test_simulate_one_seed(tmp_path, cfg_file):
    out = tmp_path / "out"
    assert main(["simulate", "-c", cfg_file, "--model", "sma", "--seeds", "42", "--out", str(out),
                 "--jobs", "1"]) == 0
    assert os.listdir(out / "results" / "sma") == ["42.json"]


def test_missing_config_no_writes(tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", "-c", str(tmp_path / "nope.yaml"), "--out", str(out)]) == 2
    assert not out.exists()


def test_bad_config_is_usage_error(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("chain:\n  holding: 3\n")
    assert main(["simulate", "-c", str(path), "--out", str(tmp_path / "o")]) == 2
    assert "chain" in capsys.readouterr().err


def test_usage_errors():
    assert main([]) == 2
    assert main(["nonsense"]) == 2
    assert main(["simulate", "--model", "arima"]) == 2


def test_partial_failure_exit_code(tmp_path, cfg_file, monkeypatch):
    import liquidchain.engine as engine
    from liquidchain.exceptions import NumericError

    real = engine.run_single

    def flaky(config, seed, model_name=None):
        if seed == 43:
            raise NumericError("diverged")
        return real(config, seed, model_name)

    monkeypatch.setattr(engine, "run_single", flaky)
    code = main(["simulate", "-c", cfg_file, "--seeds", "42,43", "--out", str(tmp_path), "--jobs", "1"])
    assert code == 1
    assert os.listdir(tmp_path / "results" / "sma") == ["42.json"]


def test_env_var_sets_output(tmp_path, cfg_file, monkeypatch):
    monkeypatch.setenv("LIQUIDCHAIN_OUTPUT", str(tmp_path / "env"))
    assert main(["simulate", "-c", cfg_file, "--seeds", "42", "--jobs", "1"]) == 0
    assert (tmp_path / "env" / "results" / "sma" / "42.json").exists()


def test_evaluate_single_run(tmp_path, cfg_file):
    main(["simulate", "-c", cfg_file, "--seeds", "42", "--out", str(tmp_path), "--jobs", "1"])
    assert main(["evaluate", "--out", str(tmp_path), "--weights", "custom"]) == 0
    report = tmp_path / "report"
    scores = (report / "scores.csv").read_text().splitlines()
    assert scores[0] == "model,n_runs,custom_mean,custom_sd,custom_rank"
    assert len(scores) == 2
    stats = json.loads((report / "stats.json").read_text())
    assert stats["custom"]["pairwise_welch"] == [] and "note" in stats["custom"]
    assert (report / "cumulative_profit.svg").exists()


def test_evaluate_two_models(tmp_path, cfg_file):
    for model in ("sma", "gbt"):
        main(["simulate", "-c", cfg_file, "--model", model, "--seeds", "42,43", "--out",
              str(tmp_path), "--jobs", "1"])
    assert main(["evaluate", "--out", str(tmp_path)]) == 0
    stats = json.loads((tmp_path / "report" / "stats.json").read_text())
    assert len(stats["default"]["pairwise_welch"]) == 1 and stats["default"]["anova"]
    header = (tmp_path / "report" / "scores.csv").read_text().splitlines()[0]
    assert "default_mean" in header and "custom_mean" in header


def test_evaluate_skips_malformed(tmp_path, cfg_file):
    main(["simulate", "-c", cfg_file, "--seeds", "42", "--out", str(tmp_path), "--jobs", "1"])
    (tmp_path / "results" / "sma" / "99.json").write_text("{not json")
    assert main(["evaluate", "--out", str(tmp_path)]) == 0
    stats = json.loads((tmp_path / "report" / "stats.json").read_text())
    assert stats["skipped_files"][0].endswith("99.json")


def test_evaluate_empty_is_error(tmp_path):
    (tmp_path / "results").mkdir()
    assert main(["evaluate", "--out", str(tmp_path)]) == 2


def test_tune_single_trial(tmp_path, cfg_file):
    assert main(["tune", "-c", cfg_file, "--trials", "1", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "tuning" / "trials.jsonl").read_text().splitlines()
    assert len(lines) == 1
    best = json.loads((tmp_path / "tuning" / "best_params.json").read_text())
    assert "policy.safety_stock_base" in best["params"]


def test_robustness_rows(tmp_path, cfg_file):
    assert main(["robustness", "-c", cfg_file, "--seeds", "42", "--levels", "0.1,0.5,1.0",
                 "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "report" / "robustness.csv").read_text().splitlines()
    assert rows[0] == "level,seed,layer_1,layer_2,layer_3,total"
    assert [r.split(",")[0] for r in rows[1:]] == ["0.0", "0.1", "0.5", "1.0"]
    assert (tmp_path / "report" / "robustness.svg").exists()


def test_report_rerenders_and_requires_dir(tmp_path, cfg_file):
    assert main(["report", "--out", str(tmp_path)]) == 2
    main(["simulate", "-c", cfg_file, "--seeds", "42", "--out", str(tmp_path), "--jobs", "1"])
    main(["evaluate", "--out", str(tmp_path)])
    svg = tmp_path / "report" / "cumulative_profit.svg"
    before = svg.read_bytes()
    svg.unlink()
    assert main(["report", "--out", str(tmp_path)]) == 0
    assert svg.read_bytes() == before


def test_inputs_not_mutated(tmp_path, cfg_file):
    before = open(cfg_file).read()
    main(["simulate", "-c", cfg_file, "--seeds", "42", "--out", str(tmp_path), "--jobs", "1"])
    result = tmp_path / "results" / "sma" / "42.json"
    snapshot = result.read_bytes()
    main(["evaluate", "--out", str(tmp_path)])
    assert open(cfg_file).read() == before and result.read_bytes() == snapshot
