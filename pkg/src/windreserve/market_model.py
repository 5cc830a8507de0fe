"""Core domain types: the daily settlement horizon and the aligned market series."""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from functools import cached_property
from zoneinfo import ZoneInfo

import numpy as np

from windreserve.errors import AlignmentError, ConfigurationError, DataError

HOURS_PER_DAY = 24
MAX_INTERVALS_PER_HOUR = 60


@dataclass(frozen=True)
class TimeGrid:
    """One delivery day split into 24 hours of equal RTM intervals.

    ``tz`` names the zone whose local midnight starts the day; interval
    start times are always reported in UTC.
    """

    day: date
    intervals_per_hour: int
    tz: str = "UTC"

    @property
    def delta_t_hours(self) -> float:
        return 1.0 / self.intervals_per_hour

    @property
    def hours(self) -> tuple[int, ...]:
        return tuple(range(HOURS_PER_DAY))

    @property
    def n_intervals(self) -> int:
        return HOURS_PER_DAY * self.intervals_per_hour

    @property
    def start_utc(self) -> datetime:
        local = datetime(self.day.year, self.day.month, self.day.day, tzinfo=ZoneInfo(self.tz))
        return local.astimezone(timezone.utc)

    @property
    def end_utc(self) -> datetime:
        return self.start_utc + timedelta(hours=HOURS_PER_DAY)

    def interval_starts_utc(self) -> list[datetime]:
        step = timedelta(hours=1) / self.intervals_per_hour
        start = self.start_utc
        return [start + k * step for k in range(self.n_intervals)]

    def hour_slice(self, hour: int) -> slice:
        if not 0 <= hour < HOURS_PER_DAY:
            raise ConfigurationError(f"hour {hour} outside 0..23")
        n = self.intervals_per_hour
        return slice(hour * n, (hour + 1) * n)

    @cached_property
    def hour_of_interval(self) -> np.ndarray:
        return np.repeat(np.arange(HOURS_PER_DAY), self.intervals_per_hour)


def build_time_grid(day: date, intervals_per_hour: int, tz: str = "UTC") -> TimeGrid:
    """Build the settlement grid for ``day``; 4 intervals per hour gives 15-minute RTM windows."""
    if isinstance(intervals_per_hour, bool) or not isinstance(intervals_per_hour, (int, np.integer)):
        raise ConfigurationError(f"intervals_per_hour must be an integer, got {intervals_per_hour!r}")
    if not 1 <= intervals_per_hour <= MAX_INTERVALS_PER_HOUR:
        raise ConfigurationError(
            f"intervals_per_hour must lie in [1, {MAX_INTERVALS_PER_HOUR}], got {intervals_per_hour}"
        )
    try:
        zone = ZoneInfo(tz)
    except Exception as exc:  # ZoneInfoNotFoundError, ValueError on malformed keys
        raise ConfigurationError(f"unknown timezone {tz!r}") from exc
    start = datetime(day.year, day.month, day.day, tzinfo=zone)
    nxt = day + timedelta(days=1)
    end = datetime(nxt.year, nxt.month, nxt.day, tzinfo=zone)
    length = end.astimezone(timezone.utc) - start.astimezone(timezone.utc)
    if length != timedelta(hours=HOURS_PER_DAY):
        raise DataError(f"{day} in {tz} lasts {length}; only 24-hour days are supported")
    return TimeGrid(day=day, intervals_per_hour=int(intervals_per_hour), tz=tz)


class _Series:
    """Immutable float vector. Subclasses add length/sign rules checked by align_horizon."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.ndim != 1:
            raise DataError(f"{type(self).__name__} must be one-dimensional")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class DamPriceSeries(_Series):
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class RtmPriceSeries(_Series):
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class WindActualSeries(_Series):
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class WindForecast(_Series):
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class MarketSeries:
    grid: TimeGrid
    dam: DamPriceSeries
    rtm: RtmPriceSeries
    wind: WindActualSeries
    forecast: WindForecast

    def __eq__(self, other):
        if not isinstance(other, MarketSeries):
            return NotImplemented
        return (
            self.grid == other.grid
            and self.dam == other.dam
            and self.rtm == other.rtm
            and self.wind == other.wind
            and self.forecast == other.forecast
        )

    __hash__ = None

    def isclose(self, other: MarketSeries, atol: float = 1e-9) -> bool:
        if self.grid != other.grid:
            return False
        pairs = [
            (self.dam, other.dam),
            (self.rtm, other.rtm),
            (self.wind, other.wind),
            (self.forecast, other.forecast),
        ]
        return all(
            a.values.shape == b.values.shape and np.allclose(a.values, b.values, rtol=0.0, atol=atol)
            for a, b in pairs
        )

    def hour(self, hour: int) -> tuple[float, np.ndarray, np.ndarray, float]:
        """(DAM price, RTM prices, wind actuals, forecast) restricted to one hour."""
        sl = self.grid.hour_slice(hour)
        return (
            float(self.dam.values[hour]),
            self.rtm.values[sl],
            self.wind.values[sl],
            float(self.forecast.values[hour]),
        )


def mean_daily_forecast(wind: WindActualSeries, grid: TimeGrid) -> WindForecast:
    """Flat forecast: every hour gets the mean of all of the day's interval actuals."""
    if len(wind) == 0:
        raise DataError("cannot forecast from an empty wind series")
    if len(wind) != grid.n_intervals:
        raise AlignmentError(
            f"wind has {len(wind)} intervals, grid expects {grid.n_intervals}"
        )
    # fsum is exactly rounded, so the mean does not depend on interval order
    mean = math.fsum(wind.values) / len(wind)
    return WindForecast(np.full(HOURS_PER_DAY, mean))


def _check_finite(name: str, values: np.ndarray) -> None:
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise DataError(f"{name}: non-finite value {values[bad[0]]} at interval {bad[0]}")


def align_horizon(
    dam: DamPriceSeries,
    rtm: RtmPriceSeries,
    wind: WindActualSeries,
    forecast: WindForecast,
    grid: TimeGrid,
) -> MarketSeries:
    """Validate lengths, finiteness and signs, then bundle the inputs unchanged."""
    expected = {
        "dam": (dam, HOURS_PER_DAY),
        "rtm": (rtm, grid.n_intervals),
        "wind": (wind, grid.n_intervals),
        "forecast": (forecast, HOURS_PER_DAY),
    }
    for name, (series, n) in expected.items():
        if len(series) != n:
            raise AlignmentError(f"{name} series has length {len(series)}, expected {n}")
    for name, (series, _) in expected.items():
        _check_finite(name, series.values)
    for name, series in (("wind", wind), ("forecast", forecast)):
        neg = np.flatnonzero(series.values < 0)
        if neg.size:
            raise DataError(f"{name}: negative value {series.values[neg[0]]} at interval {neg[0]}")
    return MarketSeries(grid=grid, dam=dam, rtm=rtm, wind=wind, forecast=forecast)
