from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from windreserve.errors import ConfigurationError, DomainError
from windreserve.settlement import (
    Strategy,
    settle_day,
    settle_scenario1,
    settle_scenario2,
    settle_scenario3_given_q,
)

from conftest import make_series, market_days


def exact_profit(lam_da, lam_rt, wind, dt, q):
    """Reference two-settlement profit in rational arithmetic."""
    F = Fraction
    total = F(lam_da) * F(q)
    for lam, w in zip(lam_rt, wind):
        total -= F(dt) * F(lam) * (F(q) - F(w))
    return total


# the worked hour: DAM 50, RTM [40, 60, 40, 60], forecast 100, actual [90, 110, 90, 110]
HOUR = dict(lam_da=50, lam_rt=[40, 60, 40, 60], wind=[90, 110, 90, 110], dt=0.25)


@pytest.fixture
def worked():
    return make_series(50.0, [40.0, 60.0, 40.0, 60.0], [90.0, 110.0, 90.0, 110.0], 100.0)


def test_oracle_on_worked_hour():
    # 5000 - 0.25 * (400 - 600 + 400 - 600) = 5100
    assert exact_profit(q=100, **HOUR) == 5100
    # 0.25 * (3600 + 6600 + 3600 + 6600) = 5100
    assert exact_profit(q=0, **HOUR) == 5100
    # DAM price equals 0.25 * 200, so the objective is flat in q
    assert exact_profit(q=50, **HOUR) == 5100


def test_scenario1_worked_example(worked):
    s = settle_scenario1(worked, 0)
    assert s.profit == 5100.0
    assert s.q_committed == 100.0
    assert s.dam_revenue == 5000.0
    assert s.rtm_settlement == -100.0
    assert s.profit == s.dam_revenue - s.rtm_settlement


def test_scenario1_zero_deviation():
    series = make_series(70.0, [10.0, 500.0, -20.0, 33.0], 80.0, 80.0)
    assert settle_scenario1(series, 5).profit == 70.0 * 80.0


def test_scenario1_zero_forecast_equals_scenario2():
    series = make_series(70.0, [10.0, 500.0, -20.0, 33.0], [5.0, 6.0, 7.0, 8.0], 0.0)
    assert settle_scenario1(series, 3).profit == settle_scenario2(series, 3).profit


def test_scenario2_worked_example(worked):
    s = settle_scenario2(worked, 7)
    assert s.profit == 5100.0
    assert s.dam_revenue == 0.0
    assert s.q_committed == 0.0


def test_scenario2_no_generation():
    series = make_series(70.0, [10.0, 500.0, -20.0, 33.0], 0.0, 10.0)
    assert settle_scenario2(series, 0).profit == 0.0


def test_scenario2_constant_is_one_hour_of_energy():
    series = make_series(70.0, 42.0, 300.0, 10.0)
    assert settle_scenario2(series, 11).profit == pytest.approx(42.0 * 300.0, abs=1e-9)


def test_scenario3_half_forecast_matches_oracle(worked):
    s = settle_scenario3_given_q(worked, 0, 50.0)
    assert Fraction(s.profit) == exact_profit(q=50, **HOUR)


def test_scenario3_corners_equal_other_scenarios(worked):
    assert settle_scenario3_given_q(worked, 2, 100.0).profit == settle_scenario1(worked, 2).profit
    assert settle_scenario3_given_q(worked, 2, 0.0).profit == settle_scenario2(worked, 2).profit


@pytest.mark.parametrize("q", [-1e-9, 100.0000001, 250.0])
def test_scenario3_rejects_infeasible_q(worked, q):
    with pytest.raises(DomainError):
        settle_scenario3_given_q(worked, 0, q)


@settings(max_examples=200)
@given(market_days(), st.integers(0, 23), st.floats(0, 1))
def test_settlement_matches_exact_oracle(series, hour, frac):
    lam_da, lam_rt, wind, w_f = series.hour(hour)
    q = frac * w_f
    got = settle_scenario3_given_q(series, hour, q).profit
    want = float(exact_profit(lam_da, lam_rt, wind, series.grid.delta_t_hours, q))
    scale = 1.0 + abs(lam_da * q) + float(np.sum(np.abs(lam_rt) * (q + wind))) * series.grid.delta_t_hours
    assert abs(got - want) <= 1e-12 * scale


@settings(max_examples=200)
@given(market_days(), st.integers(0, 23))
def test_equivalence_identities_hold_exactly(series, hour):
    w_f = series.forecast.values[hour]
    assert settle_scenario3_given_q(series, hour, w_f).profit == settle_scenario1(series, hour).profit
    assert settle_scenario3_given_q(series, hour, 0.0).profit == settle_scenario2(series, hour).profit


@settings(max_examples=200)
@given(market_days(), st.integers(0, 23), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_profit_is_affine_in_q(series, hour, f1, f2, alpha):
    w_f = series.forecast.values[hour]
    q1, q2 = f1 * w_f, f2 * w_f
    qm = min(max(alpha * q1 + (1 - alpha) * q2, 0.0), w_f)
    p = lambda q: settle_scenario3_given_q(series, hour, q).profit
    mix = alpha * p(q1) + (1 - alpha) * p(q2)
    # relative to the size of the terms being cancelled
    assert abs(p(qm) - mix) <= 1e-9 * max(1.0, abs(p(q1)), abs(p(q2)), abs(p(w_f)), abs(p(0.0)))


@settings(max_examples=200)
@given(market_days(), st.integers(0, 23))
def test_feasible_optimum_dominates_scenarios_1_and_2(series, hour):
    w_f = series.forecast.values[hour]
    grid = np.linspace(0.0, w_f, 11)
    best = max(settle_scenario3_given_q(series, hour, q).profit for q in grid)
    assert best >= max(settle_scenario1(series, hour).profit, settle_scenario2(series, hour).profit)


def test_settle_day_zero_slope_all_equal():
    # DAM price equals the mean RTM price every hour
    series = make_series(50.0, [40.0, 60.0, 40.0, 60.0], [90.0, 110.0, 90.0, 110.0], 100.0)
    totals = {s: settle_day(series, s).total_profit for s in ("S1", "S2", "S3_closed_form")}
    assert totals["S1"] == totals["S2"] == totals["S3_closed_form"]


def test_settle_day_no_wind_forces_zero():
    series = make_series(80.0, 30.0, 0.0, 0.0)
    day = settle_day(series, Strategy.S3_CLOSED_FORM)
    assert day.total_profit == 0.0
    assert day.total_q == 0.0


def test_settle_day_is_additive(worked):
    for strat, hourly in [(Strategy.S1, settle_scenario1), (Strategy.S2, settle_scenario2)]:
        day = settle_day(worked, strat)
        assert day.total_profit == 24 * hourly(worked, 0).profit
        assert len(day.per_hour) == 24
    assert settle_day(worked, Strategy.S1).total_q == 2400.0


def test_settle_day_given_profile(worked):
    q = [0.0, 100.0] * 12
    day = settle_day(worked, Strategy.S3_GIVEN_Q, q_profile=q)
    assert [h.q_committed for h in day.per_hour] == q
    with pytest.raises(ConfigurationError):
        settle_day(worked, Strategy.S3_GIVEN_Q, q_profile=q[:5])


@settings(max_examples=100)
@given(market_days())
def test_day_totals_are_sums(series):
    for strat in Strategy:
        q = list(series.forecast.values / 2) if strat is Strategy.S3_GIVEN_Q else None
        day = settle_day(series, strat, q_profile=q)
        assert day.total_profit == pytest.approx(sum(h.profit for h in day.per_hour), rel=1e-12, abs=1e-9)
        assert day.total_q == pytest.approx(sum(h.q_committed for h in day.per_hour), rel=1e-12, abs=1e-9)
        for h in day.per_hour:
            assert h.profit == h.dam_revenue - h.rtm_settlement
        if strat is Strategy.S2:
            assert all(h.dam_revenue == 0 and h.q_committed == 0 for h in day.per_hour)
