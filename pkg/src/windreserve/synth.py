"""Seeded synthetic market days: sinusoidal wind with noise, DAM/RTM prices with spikes."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from windreserve.market_model import (
    HOURS_PER_DAY,
    DamPriceSeries,
    MarketSeries,
    RtmPriceSeries,
    WindActualSeries,
    align_horizon,
    build_time_grid,
    mean_daily_forecast,
)


@dataclass(frozen=True)
class SynthConfig:
    capacity_mw: float = 2000.0
    base_price: float = 45.0
    price_swing: float = 20.0
    rtm_noise: float = 12.0
    spike_prob: float = 0.01
    spike_size: float = 400.0
    dip_prob: float = 0.005
    wind_noise: float = 0.05


def generate_day(
    day: date,
    rng: np.random.Generator,
    intervals_per_hour: int = 4,
    config: SynthConfig = SynthConfig(),
) -> MarketSeries:
    grid = build_time_grid(day, intervals_per_hour)
    n = grid.n_intervals
    t_hours = np.arange(n) / intervals_per_hour

    level = rng.uniform(0.1, 0.6)
    amp = rng.uniform(0.05, 0.3)
    phase = rng.uniform(0, HOURS_PER_DAY)
    noise = np.cumsum(rng.normal(0, config.wind_noise / np.sqrt(intervals_per_hour), n))
    cf = np.clip(level + amp * np.sin(2 * np.pi * (t_hours + phase) / HOURS_PER_DAY) + noise, 0.0, 1.0)
    wind = config.capacity_mw * cf

    hours = np.arange(HOURS_PER_DAY)
    # evening peak around 18:00
    shape = np.exp(-((hours - 18) ** 2) / 18.0) + 0.4 * np.exp(-((hours - 8) ** 2) / 8.0)
    day_level = config.base_price * rng.uniform(0.6, 1.6)
    dam = day_level + config.price_swing * shape + rng.normal(0, 3.0, HOURS_PER_DAY)

    # RTM tracks DAM with a day-level premium/discount, noise, rare spikes and dips
    bias = rng.normal(0, 5.0)
    rtm = dam[grid.hour_of_interval] + bias + rng.normal(0, config.rtm_noise, n)
    spikes = rng.random(n) < config.spike_prob
    rtm[spikes] += rng.uniform(0.2, 1.0, spikes.sum()) * config.spike_size
    dips = rng.random(n) < config.dip_prob
    rtm[dips] = -rng.uniform(0, 50, dips.sum())

    wind_s = WindActualSeries(wind)
    return align_horizon(
        DamPriceSeries(dam),
        RtmPriceSeries(rtm),
        wind_s,
        mean_daily_forecast(wind_s, grid),
        grid,
    )


def generate_days(
    start: date,
    n_days: int,
    seed: int = 0,
    intervals_per_hour: int = 4,
    config: SynthConfig = SynthConfig(),
) -> list[MarketSeries]:
    """``n_days`` consecutive days; day ``k`` depends only on ``seed`` and ``k``."""
    children = np.random.SeedSequence(seed).spawn(n_days)
    return [
        generate_day(start + timedelta(days=k), np.random.default_rng(ss), intervals_per_hour, config)
        for k, ss in enumerate(children)
    ]
