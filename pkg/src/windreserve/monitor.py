"""Market-monitor statistics: schedule adherence, bias, grades and seasonal capacity factors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from typing import Mapping, Sequence

import numpy as np

from windreserve.errors import AlignmentError, ConfigurationError, DataError
from windreserve.market_model import HOURS_PER_DAY, MarketSeries

DEFAULT_THRESHOLDS = (0.95, 0.85)

# meteorological seasons: DJF / MAM / JJA / SON
DEFAULT_SEASONS: dict[int, str] = {
    12: "winter", 1: "winter", 2: "winter",
    3: "spring", 4: "spring", 5: "spring",
    6: "summer", 7: "summer", 8: "summer",
    9: "fall", 10: "fall", 11: "fall",
}


@dataclass(frozen=True)
class PerformanceIndex:
    producer: str
    adherence: float  # NaN when undefined (nothing committed, something delivered)
    bias_mw: float
    sample_count: int
    window: tuple[date, date] | None = None

    @property
    def undefined(self) -> bool:
        return math.isnan(self.adherence)


@dataclass(frozen=True)
class CapacityFactorReport:
    season: str
    mean: float
    hourly_profile: tuple[float, ...]
    sample_count: int
    clipped_count: int = 0


def adherence_index(
    commitments: Sequence[float],
    actuals: Sequence[float],
    delta_t_hours: float,
    producer: str = "producer",
    window: tuple[date, date] | None = None,
) -> PerformanceIndex:
    """L1 schedule adherence: 1 minus delivered-energy error over committed energy, floored at 0."""
    q = np.asarray(commitments, dtype=float)
    w = np.asarray(actuals, dtype=float)
    if q.shape != w.shape or q.ndim != 1:
        raise AlignmentError(f"commitments {q.shape} and actuals {w.shape} are not aligned")
    if q.size == 0:
        raise DataError("adherence needs at least one interval")
    dev = q - w
    abs_energy = math.fsum(np.abs(dev) * delta_t_hours)
    committed_energy = math.fsum(q * delta_t_hours)
    if committed_energy > 0:
        adherence = max(0.0, 1.0 - abs_energy / committed_energy)
    elif abs_energy == 0:
        adherence = 1.0
    else:
        adherence = math.nan
    bias = math.fsum(dev) / dev.size
    return PerformanceIndex(producer, adherence, bias, int(dev.size), window)


def adherence_from_days(
    days: Sequence[MarketSeries],
    commitments: Sequence[Sequence[float]],
    producer: str = "producer",
) -> PerformanceIndex:
    """Adherence over several days given per-day 24-entry hourly commitments."""
    if not days:
        raise DataError("no days supplied")
    if len(commitments) != len(days):
        raise AlignmentError(f"{len(commitments)} commitment profiles for {len(days)} days")
    dts = {d.grid.delta_t_hours for d in days}
    if len(dts) != 1:
        raise AlignmentError("all days must share one interval length")
    q = np.concatenate(
        [np.asarray(c, dtype=float)[d.grid.hour_of_interval] for d, c in zip(days, commitments)]
    )
    w = np.concatenate([d.wind.values for d in days])
    return adherence_index(q, w, dts.pop(), producer, (days[0].grid.day, days[-1].grid.day))


def capacity_factor(
    days: Sequence[MarketSeries],
    installed_capacity_mw: float,
    seasons: Mapping[int, str] = DEFAULT_SEASONS,
) -> tuple[dict[str, CapacityFactorReport], CapacityFactorReport]:
    """Per-season and whole-history capacity factors.

    Output above ``installed_capacity_mw`` is clipped to it and counted in
    ``clipped_count`` rather than rejected.
    """
    if installed_capacity_mw <= 0:
        raise ConfigurationError(f"installed capacity must be > 0, got {installed_capacity_mw}")
    if not days:
        raise DataError("no days supplied")
    grouped: dict[str, list[MarketSeries]] = {}
    for d in days:
        try:
            label = seasons[d.grid.day.month]
        except KeyError:
            raise ConfigurationError(f"month {d.grid.day.month} has no season") from None
        grouped.setdefault(label, []).append(d)

    def summarize(label: str, members: Sequence[MarketSeries]) -> CapacityFactorReport:
        ratios, hours, clipped = [], [], 0
        for d in members:
            w = d.wind.values
            clipped += int(np.count_nonzero(w > installed_capacity_mw))
            ratios.append(np.minimum(w, installed_capacity_mw) / installed_capacity_mw)
            hours.append(d.grid.hour_of_interval)
        r = np.concatenate(ratios)
        hr = np.concatenate(hours)
        profile = tuple(
            math.fsum(r[hr == h]) / np.count_nonzero(hr == h) for h in range(HOURS_PER_DAY)
        )
        return CapacityFactorReport(label, math.fsum(r) / r.size, profile, int(r.size), clipped)

    per_season = {label: summarize(label, members) for label, members in grouped.items()}
    return per_season, summarize("all", days)


def classify(
    indices: Sequence[PerformanceIndex],
    thresholds: tuple[float, float] = DEFAULT_THRESHOLDS,
) -> dict[str, str]:
    """Letter grade per producer: A at or above the first cutoff, B at or above the second, else C.

    Undefined adherence grades C.
    """
    if len(thresholds) != 2:
        raise ConfigurationError(f"need two cutoffs (A, B), got {thresholds!r}")
    t_a, t_b = thresholds
    if not (0.0 <= t_b < t_a <= 1.0):
        raise ConfigurationError(f"cutoffs must satisfy 0 <= t_B < t_A <= 1, got {thresholds!r}")
    grades = {}
    for idx in indices:
        a = idx.adherence
        if not math.isnan(a) and a >= t_a:
            grades[idx.producer] = "A"
        elif not math.isnan(a) and a >= t_b:
            grades[idx.producer] = "B"
        else:
            grades[idx.producer] = "C"
    return grades
