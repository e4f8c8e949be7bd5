import numpy as np
import pytest

from liquidchain.exceptions import ConfigurationError, DomainError
from liquidchain.features import WindowDataset
from liquidchain.forecast import (ForecastSmoother, ForecasterSpec, GBTForecaster,
                                  HybridForecaster, SMAForecaster, fit_forecaster,
                                  horizon_weights, make_forecaster, smooth, weight_horizon)
from liquidchain.rng import make_rng


def windows(n=30, demand=None, seed=0):
    rng = make_rng(seed)
    X = rng.random((n, 10, 10)) * 10
    if demand is not None:
        X[:, :, 0] = demand
    return X


def test_horizon_weights():
    w = horizon_weights()
    assert w[0] == 1.0 and w[-1] == 0.5
    assert w.sum() == pytest.approx(5.25)


def test_weight_horizon_examples():
    assert weight_horizon([7.0] * 7) == pytest.approx(7.0)
    assert weight_horizon([1, 0, 0, 0, 0, 0, 0]) == pytest.approx(1 / 5.25)
    assert weight_horizon([0] * 7) == 0
    with pytest.raises(DomainError):
        weight_horizon([1, 2, 3])


def test_smooth_examples():
    assert smooth(None, 50) == 50
    assert smooth(50, 60) == pytest.approx(53)
    level = None
    for _ in range(60):
        level = smooth(level, 42.0)
    assert level == pytest.approx(42.0)
    with pytest.raises(DomainError):
        smooth(1, 2, alpha=0)


def test_smoother_state():
    sm = ForecastSmoother()
    a = sm([50.0] * 7)
    b = sm([60.0] * 7)
    assert a.smoothed_point == 50 and b.smoothed_point == pytest.approx(53)
    assert b.weighted_point == pytest.approx(60)
    assert sm([-5.0] * 7).raw.min() == 0


def test_sma_examples():
    sma = SMAForecaster().fit()
    assert np.allclose(sma.predict(windows(1, demand=50.0)), 50.0)
    X = windows(1)
    X[0, :, 0] = [40] * 5 + [60] * 5
    assert np.allclose(sma.predict(X), [[50.0] * 7])
    assert sma.fit().predict(X).shape == (1, 7)
    with pytest.raises(ConfigurationError):
        SMAForecaster(window=11).predict(X)


def test_sma_short_window_uses_last_days():
    X = windows(1)
    X[0, :, 0] = np.arange(10.0)
    assert SMAForecaster(window=2).predict(X)[0, 0] == pytest.approx(8.5)


def test_hybrid_input_dimension():
    X, Y = windows(20), make_rng(1).random((20, 7)) * 50
    m = HybridForecaster(n_neurons=64, epochs=1, n_trees=2).fit(X, Y)
    assert m.n_gbt_inputs_ == 640
    assert m.predict(X[:3]).shape == (3, 7)


def test_gbt_input_dimension():
    X, Y = windows(20), make_rng(1).random((20, 7)) * 50
    m = GBTForecaster(n_trees=3).fit(X, Y)
    assert m.n_gbt_inputs_ == 100


def test_hybrid_constant_demand_within_ten_percent():
    X = windows(40, demand=50.0)
    Y = np.full((40, 7), 50.0)
    m = HybridForecaster(n_neurons=8, epochs=10, n_trees=20).fit(X, Y)
    pred = m.predict(windows(5, demand=50.0, seed=9))
    assert np.all(np.abs(pred - 50) <= 5)


def test_outputs_non_negative():
    X, Y = windows(20), -make_rng(2).random((20, 7))
    assert GBTForecaster(n_trees=3).fit(X, Y).predict(X).min() == 0


def test_fit_forecaster_dispatch_and_determinism():
    X, Y = windows(20), make_rng(3).random((20, 7)) * 50
    ds = WindowDataset(X, Y, np.arange(20))
    a = fit_forecaster(ForecasterSpec("hybrid", {"n_neurons": 4, "epochs": 2, "n_trees": 3}), ds, seed=5)
    b = fit_forecaster(ForecasterSpec("hybrid", {"n_neurons": 4, "epochs": 2, "n_trees": 3}), ds, seed=5)
    assert a.checkpoint() == b.checkpoint()
    assert isinstance(make_forecaster(ForecasterSpec("sma")), SMAForecaster)
    sma = fit_forecaster(ForecasterSpec("sma"), ds)
    assert sma.checkpoint() == fit_forecaster(ForecasterSpec("sma"), ds).checkpoint()
    with pytest.raises(ConfigurationError):
        ForecasterSpec("arima")


def test_scaler_uses_scale_rows():
    X, Y = windows(20), make_rng(3).random((20, 7))
    rows = np.vstack([X.reshape(-1, 10), np.full((1, 10), 1000.0)])
    m = GBTForecaster(n_trees=2).fit(X, Y, scale_rows=rows)
    assert np.all(m.scaler_.data_max_ == 1000.0)


def test_window_shape_validation():
    with pytest.raises(DomainError):
        SMAForecaster().predict(np.zeros((1, 9, 10)))
