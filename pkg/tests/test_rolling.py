import numpy as np
import pytest
from hypothesis import given, strategies as st

from volrecur.errors import ConfigError, DataError, InsufficientData
from volrecur.fitting import fit_qexp
from volrecur.intervals import intervals_for_tau
from volrecur.rolling import WindowSpec, months_to_slots, rolling_fit, slope_vs_tau
from volrecur.synthetic import (GeneratorSpec, clustered_prices, events_to_volatility,
                                renewal_event_series)
from volrecur.volatility import VolatilitySeries, log_abs_returns

from oracles import ols_slope

MEAN = 20.0


def _qexp_events(q, n, seed, lam=None):
    lam = lam or 1 / ((3 - 2 * q) * MEAN)
    return renewal_event_series(GeneratorSpec("qexp", {"q": q, "lam": lam}, n, seed))


def test_window_spec_rules():
    with pytest.raises(ConfigError):
        WindowSpec(10, 10)
    with pytest.raises(ConfigError):
        WindowSpec(10, 0)
    assert months_to_slots(48, 242, 21) == 48 * 242 * 21
    with pytest.raises(ConfigError):
        months_to_slots(0, 242)


@given(st.integers(1, 10_000), st.integers(1, 500), st.integers(1, 500))
def test_window_count_formula(length, window, step):
    if not window > step:
        return
    expected = (length - window) // step + 1 if length >= window else 0
    assert WindowSpec(window, step).count(length) == expected


def test_window_count_in_fit():
    vol = events_to_volatility(_qexp_events(1.3, 2000, 1), seed=1)
    spec = WindowSpec(20_000, 7_000, min_intervals=100)
    traj = rolling_fit(vol, (MEAN,), spec)
    assert traj.window_count == (len(vol) - 20_000) // 7_000 + 1
    assert len(traj.points) == traj.window_count
    assert [p.end - p.start for p in traj.points] == [20_000] * traj.window_count


def test_full_length_window_equals_full_fit():
    vol = events_to_volatility(_qexp_events(1.3, 3000, 2), seed=2)
    traj = rolling_fit(vol, (MEAN, 40.0), WindowSpec(len(vol), 5))
    assert len(traj.points) == 1
    for tau in (MEAN, 40.0):
        full = fit_qexp(intervals_for_tau(vol, tau))
        assert traj.points[0].q_by_tau[tau] == full.params["q"]
        assert traj.points[0].lambda_x_by_tau[tau] == full.params["lambda_x"]


def test_stationary_generator_concentrates():
    vol = events_to_volatility(_qexp_events(1.3, 50_000, 3), seed=3)
    spec = WindowSpec(200_000, 100_000)
    q = rolling_fit(vol, (MEAN,), spec).q_means()
    assert len(q) >= 8
    assert abs(q.mean() - 1.3) <= 0.05
    assert q.std() <= 0.1
    assert np.subtract(*np.percentile(q, [75, 25])) <= 0.1


def test_regime_switch_crosses_midpoint():
    first = _qexp_events(1.1, 10_000, 4)
    # q = 1.5 has no finite mean; pick λ so the median interval stays near 20
    second = _qexp_events(1.5, 10_000, 5, lam=0.1)
    events = np.concatenate([first, second[1:]])
    # zero off-event so a window with fewer events than n/τ_Q thresholds at 0
    # and keeps exactly its events instead of mixing in noise
    u = np.random.default_rng(4).random(len(events))
    idx = np.arange(len(events))
    vol = VolatilitySeries(idx // 240, idx % 240, np.where(events, 1 + u, 0.0), "normalized", 240)
    spec = WindowSpec(60_000, 20_000)
    traj = rolling_fit(vol, (MEAN,), spec)
    q = traj.q_means()
    mid = np.array([(p.start + p.end) / 2 for p in traj.points])
    assert q[0] < 1.2 and q[-1] > 1.4
    cross = mid[np.argmax(q > 1.3)]
    assert abs(cross - len(first)) <= spec.window_len


def test_missing_tau_entries_are_empty():
    vol = events_to_volatility(_qexp_events(1.3, 1500, 6), seed=6)
    traj = rolling_fit(vol, (MEAN, 5000.0), WindowSpec(len(vol) // 2, len(vol) // 4))
    rows = list(traj.rows())
    assert traj.header == ("window_end", "q_mean", "lambda_x_tau20", "lambda_x_tau5000")
    assert all(r[3] is None for r in rows)
    assert all(r[1] is not None for r in rows)


def test_raw_input_pattern_modes():
    prices = clustered_prices(GeneratorSpec("clustered", {"slots_per_day": 60}, 400, seed=7))
    raw = log_abs_returns(prices)
    spec = WindowSpec(8_000, 6_000)
    per_window = rolling_fit(raw, (40.0,), spec)
    shared = rolling_fit(raw, (40.0,), spec, pattern="global")
    assert per_window.pattern == "window" and shared.pattern == "global"
    assert len(per_window.points) == len(shared.points) > 0
    with pytest.raises(ConfigError):
        rolling_fit(raw, (40.0,), spec, pattern="daily")


def test_short_series_rejected():
    vol = events_to_volatility(_qexp_events(1.3, 100, 8), seed=8)
    with pytest.raises(InsufficientData):
        rolling_fit(vol, (MEAN,), WindowSpec(len(vol) + 1, 10))


def test_slope_examples():
    assert slope_vs_tau([1.3] * 6, [20, 25, 40, 60, 80, 100])[0] == 0.0
    slope, intercept, _ = slope_vs_tau([1, 2, 3], [20, 60, 100])
    assert slope == pytest.approx(0.025, rel=1e-14)
    assert intercept == pytest.approx(0.5, rel=1e-12)
    with pytest.raises(InsufficientData):
        slope_vs_tau([1, 2], [20, 40])
    with pytest.raises(DataError):
        slope_vs_tau([1, 2, 3], [20, 40])


@given(st.lists(st.floats(-10, 10), min_size=3, max_size=10), st.data())
def test_slope_matches_polyfit(ys, data):
    taus = data.draw(st.lists(st.floats(1, 200), min_size=len(ys), max_size=len(ys), unique=True))
    if np.ptp(taus) < 1e-3:
        return
    slope = slope_vs_tau(ys, taus)[0]
    assert slope == pytest.approx(ols_slope(taus, ys), rel=1e-7, abs=1e-9)
