"""Two-settlement producer profit for the three wind bidding scenarios.

Scenario 1 commits the forecast in the DAM, scenario 2 sells only in the RTM,
scenario 3 commits a chosen quantity ``q`` in ``[0, W^f]``. All three share one
objective evaluation, so scenario 3 at ``q = W^f`` / ``q = 0`` reproduces
scenarios 1 / 2 bit for bit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from datetime import date
from typing import Sequence

import numpy as np

from windreserve.errors import ConfigurationError, DomainError
from windreserve.market_model import HOURS_PER_DAY, MarketSeries


class Strategy(str, enum.Enum):
    S1 = "S1"
    S2 = "S2"
    S3_CLOSED_FORM = "S3_closed_form"
    S3_GIVEN_Q = "S3_given_q_profile"

    @property
    def scenario(self) -> str:
        return self.value[:2]


@dataclass(frozen=True)
class HourSettlement:
    hour: int
    scenario: str
    q_committed: float
    dam_revenue: float
    # positive = paid by the producer
    rtm_settlement: float
    profit: float


@dataclass(frozen=True)
class DaySettlement:
    day: date
    scenario: str
    per_hour: tuple[HourSettlement, ...]
    total_profit: float
    total_q: float


def hour_objective(lam_da, lam_rt: np.ndarray, wind: np.ndarray, delta_t: float, q):
    """DAM revenue and RTM settlement of committing ``q`` for one hour.

    ``q`` may be a scalar or an array of candidate quantities; the RTM sum is
    accumulated interval by interval in a fixed order, so a given ``q``
    yields the same bits whichever form it is passed in.
    """
    q = np.asarray(q, dtype=float)
    dam_revenue = lam_da * q
    rtm = np.zeros_like(q)
    for price, w in zip(lam_rt, wind):
        rtm = rtm + delta_t * price * (q - w)
    return dam_revenue, rtm


def _settle(series: MarketSeries, hour: int, q: float, scenario: str) -> HourSettlement:
    lam_da, lam_rt, wind, _ = series.hour(hour)
    dam, rtm = hour_objective(lam_da, lam_rt, wind, series.grid.delta_t_hours, q)
    dam, rtm = float(dam), float(rtm)
    return HourSettlement(
        hour=hour,
        scenario=scenario,
        q_committed=float(q),
        dam_revenue=dam,
        rtm_settlement=rtm,
        profit=dam - rtm,
    )


def settle_scenario1(series: MarketSeries, hour: int) -> HourSettlement:
    """Commit the hour's forecast in the DAM, settle the deviation at RTM prices."""
    return _settle(series, hour, series.forecast.values[hour], "S1")


def settle_scenario2(series: MarketSeries, hour: int) -> HourSettlement:
    """RTM-only participation: every interval's actual output sold at the RTM price."""
    return _settle(series, hour, 0.0, "S2")


def settle_scenario3_given_q(series: MarketSeries, hour: int, q: float) -> HourSettlement:
    w_f = series.forecast.values[hour]
    if not (0.0 <= q <= w_f):
        raise DomainError(f"hour {hour}: q={q} outside feasible range [0, {w_f}]")
    return _settle(series, hour, q, "S3")


def settle_day(
    series: MarketSeries,
    strategy: Strategy | str,
    q_profile: Sequence[float] | None = None,
    tie_tolerance: float = 1e-6,
) -> DaySettlement:
    """Settle all 24 hours under one strategy and aggregate.

    ``S3_closed_form`` takes each hour's bid from the closed-form optimizer
    using realized RTM prices; ``S3_given_q_profile`` settles a caller-supplied
    24-entry bid profile (for instance forecast-price bids).
    """
    strategy = Strategy(strategy)
    if strategy is Strategy.S1:
        rows = [settle_scenario1(series, h) for h in range(HOURS_PER_DAY)]
    elif strategy is Strategy.S2:
        rows = [settle_scenario2(series, h) for h in range(HOURS_PER_DAY)]
    elif strategy is Strategy.S3_CLOSED_FORM:
        from windreserve.bid_optimizer import optimal_bid_closed_form

        rows = [
            settle_scenario3_given_q(
                series, h, optimal_bid_closed_form(series, h, tie_tolerance).q_star
            )
            for h in range(HOURS_PER_DAY)
        ]
    else:
        if q_profile is None or len(q_profile) != HOURS_PER_DAY:
            raise ConfigurationError("S3_given_q_profile needs a 24-entry q profile")
        rows = [settle_scenario3_given_q(series, h, float(q_profile[h])) for h in range(HOURS_PER_DAY)]
    return DaySettlement(
        day=series.grid.day,
        scenario=strategy.scenario,
        per_hour=tuple(rows),
        total_profit=math.fsum(r.profit for r in rows),
        total_q=math.fsum(r.q_committed for r in rows),
    )
