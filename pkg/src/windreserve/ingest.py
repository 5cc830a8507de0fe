"""CSV ingestion for ISO-style price and wind series.

Raw files are parsed to UTC step series, gap-filled, resampled onto a
``TimeGrid`` and written out as the canonical one-file-per-day CSV::

    interval_start_utc,dam_price,rtm_price,wind_mw,forecast_mw

Floats are written with the shortest repr that round-trips exactly.
"""

from __future__ import annotations

import csv
import enum
import io
import logging
import math
import os
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import IO, Sequence
from zoneinfo import ZoneInfo

import numpy as np

from windreserve.errors import (
    AlignmentError,
    ConfigurationError,
    CoverageError,
    DataError,
    GapError,
    ParseError,
)
from windreserve.market_model import (
    HOURS_PER_DAY,
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

logger = logging.getLogger(__name__)

KINDS = ("dam_price", "rtm_price", "wind_mw", "load_mw")
CANONICAL_COLUMNS = ("interval_start_utc", "dam_price", "rtm_price", "wind_mw", "forecast_mw")
MISSING_TOKENS = frozenset({"", "n/a", "na", "nan", "null", "none", "-", "--"})
_LOCAL_FORMATS = ("%m/%d/%Y %H:%M", "%m/%d/%Y %H:%M:%S")


class ResampleMethod(str, enum.Enum):
    TIME_WEIGHTED_MEAN = "time_weighted_mean"
    LAST = "last"
    LINEAR_TO_GRID = "linear_to_grid"


@dataclass(frozen=True)
class GapPolicy:
    max_fill_run: int = 3

    def __post_init__(self):
        if self.max_fill_run < 0:
            raise ConfigurationError(f"max_fill_run must be >= 0, got {self.max_fill_run}")


@dataclass(frozen=True, eq=False)
class RawSeries:
    """Strictly increasing UTC step series; NaN marks a missing value."""

    timestamps: tuple[datetime, ...]
    values: np.ndarray
    kind: str
    duplicates_dropped: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown series kind {self.kind!r}")
        arr = np.array(self.values, dtype=float)
        if arr.shape != (len(self.timestamps),):
            raise DataError("timestamps and values differ in length")
        if any(b <= a for a, b in zip(self.timestamps, self.timestamps[1:])):
            raise DataError("timestamps must be strictly increasing")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return len(self.timestamps)

    @property
    def missing_count(self) -> int:
        return int(np.count_nonzero(np.isnan(self.values)))

    def seconds_since(self, origin: datetime) -> np.ndarray:
        return np.array([(t - origin).total_seconds() for t in self.timestamps])


def parse_timestamp(text: str, zone: ZoneInfo) -> datetime:
    """ISO-8601 or ``MM/DD/YYYY HH:MM[:SS]``; naive stamps are read in ``zone``."""
    text = text.strip()
    parsed = None
    for fmt in _LOCAL_FORMATS:
        try:
            parsed = datetime.strptime(text, fmt)
            break
        except ValueError:
            pass
    if parsed is None:
        iso = text[:-1] + "+00:00" if text.endswith(("Z", "z")) else text
        parsed = datetime.fromisoformat(iso)
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=zone)
    return parsed.astimezone(timezone.utc)


def _parse_value(text: str) -> float:
    if text.strip().lower() in MISSING_TOKENS:
        return math.nan
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value {text!r}")
    return v


def _open_text(source) -> tuple[IO[str], bool]:
    if isinstance(source, (str, os.PathLike)):
        return open(source, newline="", encoding="utf-8"), True
    return source, False


def parse_csv(
    source,
    kind: str,
    timestamp_column: str,
    value_column: str,
    tz: str = "UTC",
) -> RawSeries:
    """Read one value column of a headed CSV into a RawSeries.

    Missing-value tokens (``N/A``, empty, ...) become NaN. Rows are sorted
    by time; for a repeated timestamp the row read last wins.
    """
    try:
        zone = ZoneInfo(tz)
    except Exception as exc:
        raise ConfigurationError(f"unknown timezone {tz!r}") from exc
    fh, owned = _open_text(source)
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{_name(source)}: empty file")
        header = [h.strip() for h in header]
        for col in (timestamp_column, value_column):
            if col not in header:
                raise ParseError(f"{_name(source)}: column {col!r} not in header {header}", line=1)
        ti, vi = header.index(timestamp_column), header.index(value_column)
        rows: list[tuple[datetime, float]] = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                ts = parse_timestamp(row[ti], zone)
            except (ValueError, IndexError) as exc:
                raise ParseError(f"{_name(source)}: bad timestamp ({exc})", line=line_no) from None
            try:
                value = _parse_value(row[vi])
            except (ValueError, IndexError) as exc:
                raise ParseError(f"{_name(source)}: bad value ({exc})", line=line_no) from None
            rows.append((ts, value))
    finally:
        if owned:
            fh.close()
    if not rows:
        raise DataError(f"{_name(source)}: no data rows")
    rows.sort(key=lambda r: r[0])  # stable, so file order survives within a timestamp
    kept: list[tuple[datetime, float]] = []
    for ts, value in rows:
        if kept and kept[-1][0] == ts:
            kept[-1] = (ts, value)
        else:
            kept.append((ts, value))
    dropped = len(rows) - len(kept)
    if dropped:
        logger.warning("%s: %d duplicate timestamps collapsed (last row kept)", _name(source), dropped)
    return RawSeries(
        timestamps=tuple(t for t, _ in kept),
        values=np.array([v for _, v in kept]),
        kind=kind,
        duplicates_dropped=dropped,
    )


def _name(source) -> str:
    return str(source) if isinstance(source, (str, os.PathLike)) else getattr(source, "name", "<stream>")


def resample(raw: RawSeries, grid: TimeGrid, method: ResampleMethod | str) -> np.ndarray:
    """Map a raw step series onto the grid intervals.

    ``time_weighted_mean`` holds each raw value until the next timestamp
    (the last one to the end of the day) and averages by overlap;
    ``last`` takes the value in force at each interval start;
    ``linear_to_grid`` interpolates between raw points at interval starts.
    """
    method = ResampleMethod(method)
    origin = grid.start_utc
    t = raw.seconds_since(origin)
    step = 3600.0 / grid.intervals_per_hour
    n = grid.n_intervals
    edges = np.arange(n + 1) * step
    if t[0] > 0 or t[-1] < edges[n - 1]:
        first, last = raw.timestamps[0], raw.timestamps[-1]
        need_to = origin + timedelta(seconds=float(edges[n - 1]))
        raise CoverageError(
            f"{raw.kind} covers {first.isoformat()}..{last.isoformat()}, "
            f"grid needs {origin.isoformat()}..{need_to.isoformat()}"
        )
    v = raw.values
    if method is ResampleMethod.LAST:
        idx = np.searchsorted(t, edges[:n], side="right") - 1
        return v[idx].copy()
    if method is ResampleMethod.LINEAR_TO_GRID:
        return np.interp(edges[:n], t, v)
    ends = np.append(t[1:], np.inf)
    out = np.empty(n)
    for k in range(n):
        a, b = edges[k], edges[k + 1]
        i0 = int(np.searchsorted(t, a, side="right")) - 1
        i1 = int(np.searchsorted(t, b, side="left")) - 1
        seg_lo = np.maximum(t[i0:i1 + 1], a)
        seg_hi = np.minimum(ends[i0:i1 + 1], b)
        out[k] = math.fsum(v[i0:i1 + 1] * (seg_hi - seg_lo)) / step
    return out


def _missing_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    runs, start = [], None
    for i, m in enumerate(mask):
        if m and start is None:
            start = i
        elif not m and start is not None:
            runs.append((start, i - start))
            start = None
    if start is not None:
        runs.append((start, len(mask) - start))
    return runs


def fill_gaps(
    values: Sequence[float],
    policy: GapPolicy = GapPolicy(),
    timestamps: Sequence[datetime] | None = None,
) -> np.ndarray:
    """Interpolate short NaN runs; runs at either end copy the nearest present value.

    With ``timestamps`` interpolation is linear in time and gap errors
    quote the time span; otherwise points are taken as evenly spaced.
    """
    v = np.array(values, dtype=float)
    missing = np.isnan(v)
    if missing.all():
        raise DataError("no present values to fill from")
    for start, length in _missing_runs(missing):
        if length > policy.max_fill_run:
            where = f"indices {start}..{start + length - 1}"
            if timestamps is not None:
                where += f" ({timestamps[start].isoformat()}..{timestamps[start + length - 1].isoformat()})"
            raise GapError(
                f"missing run of length {length} at {where} exceeds max_fill_run={policy.max_fill_run}",
                start=start,
                length=length,
            )
    if not missing.any():
        return v
    if timestamps is None:
        x = np.arange(v.size, dtype=float)
    else:
        x = np.array([(ts - timestamps[0]).total_seconds() for ts in timestamps])
    # np.interp clamps outside the present range: the nearest-value rule at the ends
    v[missing] = np.interp(x[missing], x[~missing], v[~missing])
    return v


def fill_raw(raw: RawSeries, policy: GapPolicy = GapPolicy()) -> RawSeries:
    filled = fill_gaps(raw.values, policy, raw.timestamps)
    return RawSeries(raw.timestamps, filled, raw.kind, raw.duplicates_dropped)


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_ts(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def canonical_text(series: MarketSeries) -> str:
    series = align_horizon(series.dam, series.rtm, series.wind, series.forecast, series.grid)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CANONICAL_COLUMNS)
    hours = series.grid.hour_of_interval
    for k, ts in enumerate(series.grid.interval_starts_utc()):
        h = hours[k]
        writer.writerow([
            _fmt_ts(ts),
            _fmt(series.dam.values[h]),
            _fmt(series.rtm.values[k]),
            _fmt(series.wind.values[k]),
            _fmt(series.forecast.values[h]),
        ])
    return buf.getvalue()


def write_canonical(series: MarketSeries, path) -> Path:
    """Write one day in canonical CSV form; raises on invalid series before touching disk."""
    text = canonical_text(series)
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)
    return path


def _hourly_constant(name: str, per_interval: np.ndarray, grid: TimeGrid) -> np.ndarray:
    blocks = per_interval.reshape(HOURS_PER_DAY, grid.intervals_per_hour)
    bad = np.flatnonzero(np.any(blocks != blocks[:, :1], axis=1))
    if bad.size:
        raise DataError(f"{name} varies within hour {bad[0]}; canonical files repeat one value per hour")
    return blocks[:, 0].copy()


def read_canonical(source, tz: str = "UTC") -> MarketSeries:
    """Parse a canonical daily CSV back into a validated MarketSeries.

    ``tz`` must be the zone the file's day was built in.
    """
    zone = ZoneInfo(tz)
    fh, owned = _open_text(source)
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{_name(source)}: empty file")
        if tuple(h.strip() for h in header) != CANONICAL_COLUMNS:
            raise ParseError(f"{_name(source)}: header {header} is not canonical", line=1)
        stamps, cols = [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CANONICAL_COLUMNS):
                raise ParseError(f"{_name(source)}: expected 5 fields, got {len(row)}", line=line_no)
            try:
                stamps.append(parse_timestamp(row[0], zone))
                cols.append([float(c) for c in row[1:]])
            except ValueError as exc:
                raise ParseError(f"{_name(source)}: {exc}", line=line_no) from None
    finally:
        if owned:
            fh.close()
    if not stamps:
        raise DataError(f"{_name(source)}: no data rows")
    if len(stamps) % HOURS_PER_DAY:
        raise AlignmentError(f"{_name(source)}: {len(stamps)} rows is not a whole 24-hour day")
    day = stamps[0].astimezone(zone).date()
    grid = build_time_grid(day, len(stamps) // HOURS_PER_DAY, tz)
    if stamps != grid.interval_starts_utc():
        raise AlignmentError(f"{_name(source)}: timestamps do not match the {day} grid")
    data = np.array(cols)
    return align_horizon(
        DamPriceSeries(_hourly_constant("dam_price", data[:, 0], grid)),
        RtmPriceSeries(data[:, 1]),
        WindActualSeries(data[:, 2]),
        WindForecast(_hourly_constant("forecast_mw", data[:, 3], grid)),
        grid,
    )


@dataclass(frozen=True)
class IngestStats:
    rows: int
    gaps_filled: int
    duplicates_dropped: int


def build_market_series(
    day: date,
    dam: RawSeries,
    rtm: RawSeries,
    wind: RawSeries,
    intervals_per_hour: int = 4,
    tz: str = "UTC",
    rtm_method: ResampleMethod | str = ResampleMethod.TIME_WEIGHTED_MEAN,
    wind_method: ResampleMethod | str = ResampleMethod.TIME_WEIGHTED_MEAN,
    policy: GapPolicy = GapPolicy(),
    forecast: RawSeries | None = None,
) -> tuple[MarketSeries, IngestStats]:
    """Gap-fill, resample and align raw series into one day's MarketSeries.

    Without a ``forecast`` series the flat daily-mean forecast is used.
    """
    grid = build_time_grid(day, intervals_per_hour, tz)
    hourly = build_time_grid(day, 1, tz)
    raws = [dam, rtm, wind] + ([forecast] if forecast is not None else [])
    filled = [fill_raw(r, policy) for r in raws]
    dam_v = resample(filled[0], hourly, ResampleMethod.LAST)
    rtm_v = resample(filled[1], grid, rtm_method)
    wind_v = resample(filled[2], grid, wind_method)
    wind_s = WindActualSeries(wind_v)
    if forecast is not None:
        fc = WindForecast(resample(filled[3], hourly, ResampleMethod.TIME_WEIGHTED_MEAN))
    else:
        fc = mean_daily_forecast(wind_s, grid)
    series = align_horizon(DamPriceSeries(dam_v), RtmPriceSeries(rtm_v), wind_s, fc, grid)
    stats = IngestStats(
        rows=grid.n_intervals,
        gaps_filled=sum(r.missing_count for r in raws),
        duplicates_dropped=sum(r.duplicates_dropped for r in raws),
    )
    return series, stats


def covered_days(raws: Sequence[RawSeries], intervals_per_hour: int = 4, tz: str = "UTC") -> list[date]:
    """Local calendar days whose grid every series covers (see ``resample``).

    DAM prices only need to cover the hourly grid.
    """
    zone = ZoneInfo(tz)
    first = min(r.timestamps[0] for r in raws).astimezone(zone).date()
    last = max(r.timestamps[-1] for r in raws).astimezone(zone).date()
    out = []
    day = first
    while day <= last:
        start = datetime(day.year, day.month, day.day, tzinfo=zone).astimezone(timezone.utc)
        ok = True
        for r in raws:
            iph = 1 if r.kind == "dam_price" else intervals_per_hour
            last_start = start + timedelta(hours=HOURS_PER_DAY) - timedelta(hours=1) / iph
            if r.timestamps[0] > start or r.timestamps[-1] < last_start:
                ok = False
                break
        if ok:
            out.append(day)
        day += timedelta(days=1)
    return out
