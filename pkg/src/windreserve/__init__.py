"""Two-settlement wind bidding, settlement and dynamic reserve toolkit."""

from windreserve.market_model import (
    DamPriceSeries,
    MarketSeries,
    RtmPriceSeries,
    TimeGrid,
    WindActualSeries,
    WindForecast,
    align_horizon,
    build_time_grid,
    mean_daily_forecast,
)
from windreserve.settlement import (
    DaySettlement,
    HourSettlement,
    Strategy,
    settle_day,
    settle_scenario1,
    settle_scenario2,
    settle_scenario3_given_q,
)
from windreserve.bid_optimizer import (
    BidDecision,
    Regime,
    optimal_bid_bruteforce,
    optimal_bid_closed_form,
    optimal_bid_expected,
)

__all__ = [
    "BidDecision",
    "DamPriceSeries",
    "DaySettlement",
    "HourSettlement",
    "MarketSeries",
    "Regime",
    "RtmPriceSeries",
    "Strategy",
    "TimeGrid",
    "WindActualSeries",
    "WindForecast",
    "align_horizon",
    "build_time_grid",
    "mean_daily_forecast",
    "optimal_bid_bruteforce",
    "optimal_bid_closed_form",
    "optimal_bid_expected",
    "settle_day",
    "settle_scenario1",
    "settle_scenario2",
    "settle_scenario3_given_q",
]
