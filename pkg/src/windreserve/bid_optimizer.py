"""Optimal day-ahead bid for scenario 3.

The hourly objective is affine in ``q``, so the optimum sits at a corner of
``[0, W^f]``: bid everything when the DAM price beats ``Δt · Σ λ_t^RT`` and
nothing otherwise (ties go to zero).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from windreserve.errors import ConfigurationError
from windreserve.market_model import MarketSeries, RtmPriceSeries
from windreserve.settlement import hour_objective

DEFAULT_TIE_TOLERANCE = 1e-6


class Regime(str, enum.Enum):
    BID_ZERO = "BID_ZERO"
    BID_FULL = "BID_FULL"
    INDIFFERENT = "INDIFFERENT"


@dataclass(frozen=True)
class BidDecision:
    hour: int
    q_star: float
    regime: Regime
    dam_price: float
    rtm_hour_sum: float
    mode: str = "hindsight"


def _decide(hour: int, lam_da: float, lam_rt: np.ndarray, delta_t: float, w_f: float,
            tie_tolerance: float, mode: str) -> BidDecision:
    if tie_tolerance < 0:
        raise ConfigurationError(f"tie_tolerance must be >= 0, got {tie_tolerance}")
    rtm_sum = delta_t * math.fsum(lam_rt)
    if abs(lam_da - rtm_sum) <= tie_tolerance:
        regime, q = Regime.INDIFFERENT, 0.0
    elif lam_da <= rtm_sum:
        regime, q = Regime.BID_ZERO, 0.0
    else:
        regime, q = Regime.BID_FULL, float(w_f)
    return BidDecision(hour, q, regime, lam_da, rtm_sum, mode)


def optimal_bid_closed_form(
    series: MarketSeries, hour: int, tie_tolerance: float = DEFAULT_TIE_TOLERANCE
) -> BidDecision:
    lam_da, lam_rt, _, w_f = series.hour(hour)
    return _decide(hour, lam_da, lam_rt, series.grid.delta_t_hours, w_f, tie_tolerance, "hindsight")


def optimal_bid_bruteforce(series: MarketSeries, hour: int, grid_points: int) -> tuple[float, float]:
    """Enumerate ``grid_points`` evenly spaced bids in ``[0, W^f]`` and keep the best.

    Independent check on the closed form. Ties resolve to the smallest ``q``.
    Both endpoints are evaluated exactly, so at a corner optimum the result
    matches the closed form bit for bit.
    """
    if grid_points < 2:
        raise ConfigurationError(f"grid_points must be >= 2, got {grid_points}")
    lam_da, lam_rt, wind, w_f = series.hour(hour)
    candidates = np.linspace(0.0, w_f, grid_points)
    dam, rtm = hour_objective(lam_da, lam_rt, wind, series.grid.delta_t_hours, candidates)
    profits = dam - rtm
    best = int(np.argmax(profits))
    return float(candidates[best]), float(profits[best])


def optimal_bid_expected(
    series: MarketSeries,
    hour: int,
    rtm_price_forecast: RtmPriceSeries | None,
    tie_tolerance: float = DEFAULT_TIE_TOLERANCE,
) -> BidDecision:
    """Closed-form rule applied to forecast RTM prices instead of realized ones.

    Settle the resulting ``q_star`` against realized prices with
    ``settle_scenario3_given_q``.
    """
    if rtm_price_forecast is None:
        raise ConfigurationError("forecast bidding needs an RTM price forecast")
    if len(rtm_price_forecast) != series.grid.n_intervals:
        raise ConfigurationError(
            f"RTM price forecast has {len(rtm_price_forecast)} intervals, "
            f"expected {series.grid.n_intervals}"
        )
    if not np.all(np.isfinite(rtm_price_forecast.values)):
        raise ConfigurationError("RTM price forecast contains non-finite values")
    lam_da, _, _, w_f = series.hour(hour)
    lam_fc = rtm_price_forecast.values[series.grid.hour_slice(hour)]
    return _decide(hour, lam_da, lam_fc, series.grid.delta_t_hours, w_f, tie_tolerance, "forecast")
