"""Schedule deviations, quantile-sized dynamic reserve, and the profit/reserve break-even."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from windreserve.bid_optimizer import DEFAULT_TIE_TOLERANCE, optimal_bid_closed_form
from windreserve.errors import AlignmentError, ConfigurationError, DataError, DomainError
from windreserve.market_model import HOURS_PER_DAY, MarketSeries, TimeGrid
from windreserve.settlement import DaySettlement, Strategy, settle_day

DEFAULT_ALPHA = 0.975
DEFAULT_WINDOW_DAYS = 30
SCENARIOS = ("S1", "S2", "S3")

_SCENARIO_STRATEGY = {
    "S1": Strategy.S1,
    "S2": Strategy.S2,
    "S3": Strategy.S3_CLOSED_FORM,
}


class Pooling(str, enum.Enum):
    HOUR_OF_DAY = "hour_of_day"
    WHOLE_WINDOW = "whole_window"


class DeviationBaseline(str, enum.Enum):
    COMMITMENT = "commitment"
    FORECAST = "forecast"


@dataclass(frozen=True, eq=False)
class DeviationSeries:
    """Committed minus actual output per interval; positive values are shortfalls."""

    grid: TimeGrid
    values: np.ndarray
    scenario: str = "custom"

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.shape != (self.grid.n_intervals,):
            raise AlignmentError(
                f"deviation series has shape {arr.shape}, grid expects {self.grid.n_intervals}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True)
class ReserveReport:
    scenario: str
    alpha: float | None
    window: str
    reserve_mw: tuple[float, ...]
    reserve_price: float
    reserve_cost: float
    wind_profit: float
    breakeven_margin: float

    @property
    def deficit(self) -> bool:
        return self.breakeven_margin < 0


def deviation_series(series: MarketSeries, commitments: Sequence[float], scenario: str = "custom") -> DeviationSeries:
    q = np.asarray(commitments, dtype=float)
    if q.shape != (HOURS_PER_DAY,):
        raise AlignmentError(f"need {HOURS_PER_DAY} hourly commitments, got shape {q.shape}")
    w_f = series.forecast.values
    bad = np.flatnonzero((q < 0) | (q > w_f))
    if bad.size:
        h = bad[0]
        raise DomainError(f"hour {h}: commitment {q[h]} outside [0, {w_f[h]}]")
    return DeviationSeries(series.grid, q[series.grid.hour_of_interval] - series.wind.values, scenario)


def lower_quantile(sample: np.ndarray, alpha: float) -> float:
    """Order statistic at 1-based rank ceil(alpha * n), no interpolation."""
    n = sample.size
    if n == 0:
        raise DataError("empty deviation pool")
    # guard against alpha * n landing a few ulps above an integer (0.7 * 10 -> 7.000000000000001)
    rank = math.ceil(alpha * n - 1e-9)
    rank = min(max(rank, 1), n)
    return float(np.partition(sample, rank - 1)[rank - 1])


def dynamic_reserve_quantile(
    history: Sequence[DeviationSeries],
    alpha: float = DEFAULT_ALPHA,
    per: Pooling | str = Pooling.HOUR_OF_DAY,
    floor_mw: float = 0.0,
) -> np.ndarray:
    """Per-hour reserve: alpha-quantile of pooled shortfalls plus an optional constant floor.

    Only the positive part of each deviation counts. ``hour_of_day`` pools
    each clock hour separately across the window; ``whole_window`` pools
    everything and returns the same value for all 24 hours.
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha}")
    if floor_mw < 0:
        raise ConfigurationError(f"reserve floor must be >= 0, got {floor_mw}")
    if not history:
        raise DataError("reserve history is empty")
    per = Pooling(per)
    if per is Pooling.WHOLE_WINDOW:
        pool = np.concatenate([np.maximum(d.values, 0.0) for d in history])
        return np.full(HOURS_PER_DAY, lower_quantile(pool, alpha) + floor_mw)
    out = np.empty(HOURS_PER_DAY)
    for h in range(HOURS_PER_DAY):
        pool = np.concatenate(
            [np.maximum(d.values[d.grid.hour_slice(h)], 0.0) for d in history]
        )
        out[h] = lower_quantile(pool, alpha) + floor_mw
    return out


def break_even(
    day_settlement: DaySettlement,
    reserve: Sequence[float],
    reserve_price: float,
    alpha: float | None = None,
    window: str = "",
) -> ReserveReport:
    """Producer profit minus the cost of holding ``reserve`` MW each hour at ``reserve_price``."""
    if reserve_price < 0:
        raise ConfigurationError(f"reserve price must be >= 0, got {reserve_price}")
    r = np.asarray(reserve, dtype=float)
    if r.shape != (HOURS_PER_DAY,):
        raise AlignmentError(f"need {HOURS_PER_DAY} hourly reserve values, got shape {r.shape}")
    if np.any(r < 0):
        raise DataError("reserve requirement cannot be negative")
    cost = math.fsum(r * reserve_price)
    return ReserveReport(
        scenario=day_settlement.scenario,
        alpha=alpha,
        window=window,
        reserve_mw=tuple(float(x) for x in r),
        reserve_price=float(reserve_price),
        reserve_cost=cost,
        wind_profit=day_settlement.total_profit,
        breakeven_margin=day_settlement.total_profit - cost,
    )


def scenario_commitments(
    series: MarketSeries,
    scenario: str,
    baseline: DeviationBaseline | str = DeviationBaseline.COMMITMENT,
    tie_tolerance: float = DEFAULT_TIE_TOLERANCE,
) -> np.ndarray:
    """Hourly schedule against which a scenario's deviations are measured.

    With the ``forecast`` baseline, RTM-only wind (S2) is measured against
    the day-ahead forecast the ISO still has to plan around, instead of
    its zero DAM commitment.
    """
    baseline = DeviationBaseline(baseline)
    if scenario == "S1":
        return np.array(series.forecast.values)
    if scenario == "S2":
        if baseline is DeviationBaseline.FORECAST:
            return np.array(series.forecast.values)
        return np.zeros(HOURS_PER_DAY)
    if scenario == "S3":
        return np.array(
            [optimal_bid_closed_form(series, h, tie_tolerance).q_star for h in range(HOURS_PER_DAY)]
        )
    raise ConfigurationError(f"unknown scenario {scenario!r}")


def scenario_reserve_comparison(
    series: MarketSeries,
    history: Sequence[MarketSeries],
    alpha: float = DEFAULT_ALPHA,
    reserve_price: float = 0.0,
    per: Pooling | str = Pooling.HOUR_OF_DAY,
    floor_mw: float = 0.0,
    baseline: DeviationBaseline | str = DeviationBaseline.COMMITMENT,
    scenarios: Sequence[str] = SCENARIOS,
    tie_tolerance: float = DEFAULT_TIE_TOLERANCE,
) -> dict[str, ReserveReport]:
    """Reserve profile, cost and break-even margin for each scenario.

    Each scenario's reserve is sized from the deviations its own bidding
    rule produces over ``history``; the margin is measured against that
    scenario's profit on ``series``.
    """
    if not history:
        raise DataError("reserve history is empty")
    window = f"{history[0].grid.day.isoformat()}..{history[-1].grid.day.isoformat()} ({len(history)} days)"
    out = {}
    for sc in scenarios:
        devs = [
            deviation_series(day, scenario_commitments(day, sc, baseline, tie_tolerance), sc)
            for day in history
        ]
        reserve = dynamic_reserve_quantile(devs, alpha, per, floor_mw)
        settled = settle_day(series, _SCENARIO_STRATEGY[sc], tie_tolerance=tie_tolerance)
        out[sc] = break_even(settled, reserve, reserve_price, alpha=alpha, window=window)
    return out
