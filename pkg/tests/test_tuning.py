import pytest

from liquidchain.exceptions import ConfigurationError, DomainError, TuningError
from liquidchain.tuning import (Categorical, Float, Int, TPESampler, apply_params, default_space,
                                objective, tune)

from conftest import small_config


def fake_objective(config, params, seed):
    # smooth bowl with optimum at safety_stock_base = 12
    return -(params["policy.safety_stock_base"] - 12.0) ** 2


def test_default_spaces():
    hybrid = default_space("hybrid")
    assert hybrid["forecaster.n_neurons"].grid()[0] == 64
    assert hybrid["forecaster.n_neurons"].grid()[-1] == 1024
    assert hybrid["forecaster.batch_size"].grid() == [4, 8]
    assert set(default_space("sma")) == {"policy.safety_stock_base"}


def test_apply_params_routes_sections():
    cfg = apply_params(small_config("gbt"), {"forecaster.n_trees": 7, "policy.safety_stock_base": 3.0})
    assert cfg.forecaster.params["n_trees"] == 7 and cfg.policy.safety_stock_base == 3.0
    with pytest.raises(ConfigurationError):
        apply_params(small_config(), {"chain.lead_time": 2})


def test_single_point_space_returns_that_point():
    space = {"policy.safety_stock_base": Categorical((7.0,))}
    res = tune(small_config(), space, n_trials=3, evaluate=fake_objective)
    assert res.best_params == {"policy.safety_stock_base": 7.0}


@pytest.mark.parametrize("sampler", ["random", "tpe"])
def test_reproducible_trial_sequence(sampler):
    space = {"policy.safety_stock_base": Float(5, 20), "forecaster.window": Int(2, 10),
             "forecaster.x": Float(1e-5, 1e-3, log=True)}
    a = tune(small_config(), space, n_trials=10, sampler=sampler, evaluate=fake_objective)
    b = tune(small_config(), space, n_trials=10, sampler=sampler, evaluate=fake_objective)
    assert [t.params for t in a.trials] == [t.params for t in b.trials]
    for t in a.trials:
        assert 5 <= t.params["policy.safety_stock_base"] <= 20
        assert 1e-5 <= t.params["forecaster.x"] <= 1e-3
        assert t.params["forecaster.window"] in range(2, 11)


def test_tpe_concentrates_near_optimum():
    space = {"policy.safety_stock_base": Float(0, 100)}
    res = tune(small_config(), space, n_trials=30, sampler="tpe", evaluate=fake_objective)
    late = [t.params["policy.safety_stock_base"] for t in res.trials[-10:]]
    early = [t.params["policy.safety_stock_base"] for t in res.trials[:3]]
    spread = lambda xs: sum(abs(x - 12) for x in xs) / len(xs)
    assert spread(late) < spread(early)
    assert abs(res.best_params["policy.safety_stock_base"] - 12) < 10


def test_tpe_categorical():
    s = TPESampler(0, n_startup=0)
    assert s.suggest({"p": Categorical(("a", "b"))}, [])["p"] in ("a", "b")


def test_failed_trials_logged_and_all_failed_raises():
    def bad(config, params, seed):
        raise DomainError("nope")
    with pytest.raises(TuningError):
        tune(small_config(), {"policy.safety_stock_base": Float(5, 6)}, n_trials=2, evaluate=bad)

    calls = []

    def flaky(config, params, seed):
        calls.append(1)
        if len(calls) == 1:
            raise DomainError("first fails")
        return 1.0
    res = tune(small_config(), {"policy.safety_stock_base": Float(5, 6)}, n_trials=2, evaluate=flaky)
    assert [t.status for t in res.trials] == ["failed", "ok"]


def test_unknown_sampler():
    with pytest.raises(ConfigurationError):
        tune(small_config(), n_trials=1, sampler="grid")


def test_best_trial_recomputes_identically():
    cfg = small_config("sma")
    res = tune(cfg, n_trials=2)
    assert res.seed == 42
    assert objective(cfg, res.best_params, res.seed) == res.best_value
    assert res.to_dict()["trials"][0]["number"] == 0
