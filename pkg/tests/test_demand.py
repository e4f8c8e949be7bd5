import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liquidchain.demand import (DemandParams, deterministic_demand, generate_demand,
                                inject_noise, to_csv)
from liquidchain.exceptions import ConfigurationError, DomainError

QUIET = DemandParams(noise_sd=0.0)


def test_day_zero_is_base():
    assert deterministic_demand(QUIET, 0) == pytest.approx(50.0)


def test_day_315_both_sines_vanish():
    assert deterministic_demand(QUIET, 315) == pytest.approx(50.0, abs=1e-9)


def test_day_ten_hand_value():
    # 50 + 20 sin(40 deg) + 5 sin(154.2857 deg) = 50 + 12.855752 + 2.169419
    expected = 50 + 20 * math.sin(math.radians(40)) + 5 * math.sin(math.radians(3600 / 7))
    assert expected == pytest.approx(65.025171, abs=1e-6)
    assert deterministic_demand(QUIET, 10) == pytest.approx(expected, abs=1e-12)


def test_noise_free_series_matches_formula():
    s = generate_demand(DemandParams(noise_sd=0.0, horizon=200))
    assert np.allclose(s, np.maximum(0, deterministic_demand(QUIET, np.arange(200))))


def test_seeded_series_reproducible_and_seed_sensitive():
    a = generate_demand(DemandParams(seed=42))
    b = generate_demand(DemandParams(seed=42))
    c = generate_demand(DemandParams(seed=43))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert len(a) == 1095


def test_floor_at_zero():
    s = generate_demand(DemandParams(base=0.0, noise_sd=10.0, horizon=500))
    assert s.min() == 0.0


@pytest.mark.parametrize("kw", [{"seasonal_period": 0}, {"horizon": 0}, {"noise_sd": -1}])
def test_invalid_params(kw):
    with pytest.raises(ConfigurationError):
        DemandParams(**kw)


def test_noise_level_zero_is_identity():
    s = generate_demand(DemandParams(horizon=50))
    assert np.array_equal(inject_noise(s, 0.0, 1), s)


def test_constant_series_unchanged():
    s = np.full(20, 40.0)
    assert np.array_equal(inject_noise(s, 1.0, 3), s)


def test_noise_bounds_two_point():
    out = inject_noise([40.0, 60.0], 1.0, seed=7)
    assert np.all((out >= 0) & (out <= 120))


def test_noise_rejects_bad_input():
    with pytest.raises(DomainError):
        inject_noise([], 0.5, 0)
    with pytest.raises(DomainError):
        inject_noise([1.0, 2.0], -0.1, 0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 500), min_size=2, max_size=40), st.floats(0, 3), st.integers(0, 10_000))
def test_noise_always_within_clamp(values, level, seed):
    out = inject_noise(values, level, seed)
    assert out.shape == (len(values),)
    assert np.all(out >= 0) and np.all(out <= 2 * max(values) + 1e-12)


def test_csv_roundtrip(tmp_path):
    s = generate_demand(DemandParams(horizon=5))
    path = tmp_path / "d.csv"
    to_csv(s, path)
    rows = path.read_text().splitlines()
    assert rows[0] == "day,demand"
    assert [float(r.split(",")[1]) for r in rows[1:]] == list(s)
