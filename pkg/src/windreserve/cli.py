"""Command-line entry point.

Subcommands: synth, ingest, simulate, optimize, reserve, monitor, report.
Settings resolve as: command-line flag > ``--config`` JSON file > built-in default.

Exit codes: 0 success, 1 usage/configuration, 2 missing file, 3 data or gap
error, 4 missing day, 5 insufficient history.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from datetime import date
from pathlib import Path
from typing import Sequence

from windreserve import ingest, monitor, reserve, synth
from windreserve.bid_optimizer import DEFAULT_TIE_TOLERANCE, optimal_bid_closed_form, optimal_bid_expected
from windreserve.errors import ConfigurationError, InsufficientHistoryError, MissingDayError, WindReserveError
from windreserve.market_model import HOURS_PER_DAY, MarketSeries
from windreserve.settlement import Strategy, settle_day

logger = logging.getLogger("windreserve")

EXIT_USAGE = 1
EXIT_MISSING_FILE = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- helpers

def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _emit(rows: list[dict], fmt: str, output: str | None, json_doc=None) -> None:
    if fmt is None:
        fmt = "csv"
    if fmt == "json":
        text = json.dumps(json_doc if json_doc is not None else rows, indent=2, sort_keys=False) + "\n"
    else:
        buf = io.StringIO()
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            for r in rows:
                writer.writerow({k: _fmt(v) for k, v in r.items()})
        text = buf.getvalue()
    if output:
        with open(output, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_float(x: float):
    return None if isinstance(x, float) and math.isnan(x) else x


def _day_path(data_dir: Path, day: date) -> Path:
    return data_dir / f"{day.isoformat()}.csv"


def _available_days(data_dir: Path) -> list[date]:
    if not data_dir.is_dir():
        raise FileNotFoundError(f"data directory not found: {data_dir}")
    days = []
    for p in sorted(data_dir.glob("*.csv")):
        try:
            days.append(date.fromisoformat(p.stem))
        except ValueError:
            continue
    return days


def _load_day(data_dir: Path, day: date, tz: str) -> MarketSeries:
    path = _day_path(data_dir, day)
    if not path.exists():
        raise MissingDayError(f"no canonical file for {day} in {data_dir}")
    return ingest.read_canonical(path, tz)


def _requested_days(args) -> list[date]:
    data_dir = Path(args.data_dir)
    if args.day:
        return sorted({date.fromisoformat(d) for d in args.day})
    days = _available_days(data_dir)
    if not days:
        raise MissingDayError(f"no canonical day files in {data_dir}")
    return days


def _scenarios(choice: str) -> list[str]:
    return ["S1", "S2", "S3"] if choice == "all" else [f"S{choice}"]


def _price_forecast(args, day: date):
    if args.mode != "forecast":
        return None
    if not args.price_forecast_dir:
        raise ConfigurationError("--mode forecast needs --price-forecast-dir")
    return _load_day(Path(args.price_forecast_dir), day, args.tz).rtm


def _s3_bids(series: MarketSeries, args) -> list:
    if args.mode == "forecast":
        fc = _price_forecast(args, series.grid.day)
        return [optimal_bid_expected(series, h, fc, args.tie_tolerance) for h in range(HOURS_PER_DAY)]
    return [optimal_bid_closed_form(series, h, args.tie_tolerance) for h in range(HOURS_PER_DAY)]


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) in (None, []):
            raise UsageError(f"{args.command}: --{name.replace('_', '-')} is required")


# ---------------------------------------------------------------- commands

def cmd_synth(args) -> int:
    _require(args, "out_dir")
    out = Path(args.out_dir)
    cfg = synth.SynthConfig(capacity_mw=args.capacity_mw)
    days = synth.generate_days(date.fromisoformat(args.start), args.days, args.seed, args.intervals_per_hour, cfg)
    out.mkdir(parents=True, exist_ok=True)
    for series in days:
        ingest.write_canonical(series, _day_path(out, series.grid.day))
    print(f"synth: wrote {len(days)} day file(s) to {out}")
    return 0


def cmd_ingest(args) -> int:
    _require(args, "dam", "rtm", "wind", "out_dir")
    files = {"dam": args.dam, "rtm": args.rtm, "wind": args.wind}
    if args.forecast:
        files["forecast"] = args.forecast
    for name, path in files.items():
        if not Path(path).is_file():
            raise FileNotFoundError(f"file not found: {path} (--{name})")
    columns = {
        "dam": ("dam_price", args.dam_column),
        "rtm": ("rtm_price", args.rtm_column),
        "wind": ("wind_mw", args.wind_column),
        "forecast": ("wind_mw", args.forecast_column),
    }
    policy = ingest.GapPolicy(args.max_fill_run)
    raws, gaps, dups = {}, 0, 0
    for name, path in files.items():
        raw = ingest.parse_csv(path, columns[name][0], args.timestamp_column, columns[name][1], args.tz)
        try:
            raws[name] = ingest.fill_raw(raw, policy)
        except ingest.GapError as exc:
            raise ingest.GapError(f"{path}: {exc}", exc.start, exc.length) from None
        gaps += raw.missing_count
        dups += raw.duplicates_dropped
    if args.day:
        days = sorted({date.fromisoformat(d) for d in args.day})
    else:
        days = ingest.covered_days(list(raws.values()), args.intervals_per_hour, args.tz)
        if not days:
            raise ingest.CoverageError("input files share no fully covered day")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = 0
    for day in days:
        series, stats = ingest.build_market_series(
            day, raws["dam"], raws["rtm"], raws["wind"],
            intervals_per_hour=args.intervals_per_hour, tz=args.tz,
            rtm_method=args.rtm_method, wind_method=args.wind_method,
            policy=policy, forecast=raws.get("forecast"),
        )
        ingest.write_canonical(series, _day_path(out, day))
        rows += stats.rows
    print(f"ingest: {len(days)} day file(s), {rows} rows, {gaps} gaps filled, {dups} duplicates dropped")
    return 0


def simulate_rows(days: Sequence[MarketSeries], args) -> list[dict]:
    rows = []
    for series in days:
        day = series.grid.day.isoformat()
        for sc in _scenarios(args.scenario):
            if sc == "S3":
                q = [b.q_star for b in _s3_bids(series, args)]
                settled = settle_day(series, Strategy.S3_GIVEN_Q, q_profile=q)
                mode = args.mode
            else:
                settled = settle_day(series, Strategy(sc))
                mode = "n/a"
            rows.append({"day": day, "scenario": sc, "mode": mode, "metric": "profit", "value": settled.total_profit})
            rows.append({"day": day, "scenario": sc, "mode": mode, "metric": "bid_quantity", "value": settled.total_q})
    return rows


def cmd_simulate(args) -> int:
    _require(args, "data_dir")
    days = [_load_day(Path(args.data_dir), d, args.tz) for d in _requested_days(args)]
    _emit(simulate_rows(days, args), args.format, args.output)
    return 0


def cmd_optimize(args) -> int:
    _require(args, "data_dir")
    rows = []
    for d in _requested_days(args):
        series = _load_day(Path(args.data_dir), d, args.tz)
        for b in _s3_bids(series, args):
            rows.append({
                "day": d.isoformat(), "hour": b.hour, "mode": b.mode,
                "dam_price": b.dam_price, "rtm_hour_sum": b.rtm_hour_sum,
                "regime": b.regime.value, "q_star": b.q_star,
            })
    _emit(rows, args.format, args.output)
    return 0


def cmd_reserve(args) -> int:
    _require(args, "data_dir")
    data_dir = Path(args.data_dir)
    available = _available_days(data_dir)
    target = date.fromisoformat(args.day[-1]) if args.day else (available[-1] if available else None)
    if target is None:
        raise InsufficientHistoryError(args.window_days, 0)
    window = [d for d in available if d <= target][-args.window_days:]
    if len(window) < args.window_days:
        raise InsufficientHistoryError(args.window_days, len(window))
    if window[-1] != target:
        raise MissingDayError(f"no canonical file for {target} in {data_dir}")
    history = [_load_day(data_dir, d, args.tz) for d in window]
    reports = reserve.scenario_reserve_comparison(
        history[-1], history,
        alpha=args.alpha, reserve_price=args.reserve_price, per=args.per,
        floor_mw=args.reserve_floor_mw, baseline=args.deviation_baseline,
        scenarios=_scenarios(args.scenario), tie_tolerance=args.tie_tolerance,
    )
    rows = []
    for sc, rep in reports.items():
        for h, r in enumerate(rep.reserve_mw):
            rows.append({"day": target.isoformat(), "scenario": sc, "hour": h, "metric": "reserve_mw", "value": r})
        for metric in ("reserve_cost", "wind_profit", "breakeven_margin"):
            rows.append({"day": target.isoformat(), "scenario": sc, "hour": "all", "metric": metric,
                         "value": getattr(rep, metric)})
    doc = {
        "day": target.isoformat(),
        "alpha": args.alpha,
        "per": args.per,
        "deviation_baseline": args.deviation_baseline,
        "reports": {
            sc: {
                "window": rep.window,
                "reserve_mw": list(rep.reserve_mw),
                "reserve_price": rep.reserve_price,
                "reserve_cost": rep.reserve_cost,
                "wind_profit": rep.wind_profit,
                "breakeven_margin": rep.breakeven_margin,
                "deficit": rep.deficit,
            }
            for sc, rep in reports.items()
        },
    }
    _emit(rows, args.format, args.output, doc)
    return 0


def _pairs(items: Sequence[str] | None, flag: str) -> dict[str, str]:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise UsageError(f"{flag} expects NAME=VALUE, got {item!r}")
        out[name] = value
    return out


def cmd_monitor(args) -> int:
    producers = _pairs(args.producer, "--producer")
    if args.data_dir:
        producers.setdefault("producer", args.data_dir)
    if not producers:
        raise UsageError("monitor: give --producer NAME=DIR or --data-dir")
    capacities = {k: float(v) for k, v in _pairs(args.capacity, "--capacity").items()}
    indices, report = [], {}
    for name, directory in producers.items():
        data_dir = Path(directory)
        days = [_load_day(data_dir, d, args.tz) for d in (sorted({date.fromisoformat(x) for x in args.day})
                                                          if args.day else _available_days(data_dir))]
        if not days:
            raise MissingDayError(f"no canonical day files in {data_dir}")
        if args.commitment_source == "s3":
            commitments = [reserve.scenario_commitments(d, "S3", tie_tolerance=args.tie_tolerance) for d in days]
        else:
            commitments = [d.forecast.values for d in days]
        idx = monitor.adherence_from_days(days, commitments, name)
        indices.append(idx)
        entry = {
            "adherence": _json_float(idx.adherence),
            "undefined": idx.undefined,
            "bias_mw": idx.bias_mw,
            "sample_count": idx.sample_count,
            "window": [idx.window[0].isoformat(), idx.window[1].isoformat()],
        }
        cap = capacities.get(name, args.installed_capacity_mw)
        if cap is not None:
            seasons, overall = monitor.capacity_factor(days, cap)
            entry["capacity_factor"] = {
                "installed_capacity_mw": cap,
                "all": overall.mean,
                "clipped_count": overall.clipped_count,
                "seasons": {
                    label: {"mean": r.mean, "hourly_profile": list(r.hourly_profile), "sample_count": r.sample_count}
                    for label, r in sorted(seasons.items())
                },
            }
        report[name] = entry
    grades = monitor.classify(indices, (args.grade_a, args.grade_b))
    for name in report:
        report[name]["grade"] = grades[name]
    rows = [
        {"producer": n, "adherence": e["adherence"], "bias_mw": e["bias_mw"],
         "sample_count": e["sample_count"], "grade": e["grade"]}
        for n, e in report.items()
    ]
    _emit(rows, args.format or "json", args.output, {"producers": report})
    return 0


def cmd_report(args) -> int:
    """Plot-ready long-format tables: daily profiles and per-scenario profit/bid bars."""
    _require(args, "data_dir", "out_dir")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    days = [_load_day(Path(args.data_dir), d, args.tz) for d in _requested_days(args)]
    profile_rows = []
    for series in days:
        hours = series.grid.hour_of_interval
        for k, ts in enumerate(series.grid.interval_starts_utc()):
            h = int(hours[k])
            profile_rows.append({
                "day": series.grid.day.isoformat(),
                "interval_start_utc": ts.strftime("%Y-%m-%dT%H:%M:%SZ"),
                "hour": h,
                "dam_price": float(series.dam.values[h]),
                "rtm_price": float(series.rtm.values[k]),
                "wind_mw": float(series.wind.values[k]),
                "forecast_mw": float(series.forecast.values[h]),
            })
    _emit(profile_rows, "csv", str(out / "profiles.csv"))
    _emit(simulate_rows(days, args), "csv", str(out / "scenario_bars.csv"))
    print(f"report: wrote profiles.csv and scenario_bars.csv for {len(days)} day(s) to {out}")
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file (flags override it)")
    common.add_argument("--intervals-per-hour", type=int, default=4)
    common.add_argument("--tz", default="UTC", help="IANA zone of the market day")
    common.add_argument("--format", choices=["csv", "json"], help="default: csv (monitor: json)")
    common.add_argument("--output", help="output file (default: stdout)")
    common.add_argument("--tie-tolerance", type=float, default=DEFAULT_TIE_TOLERANCE)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="windreserve", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def data_args(p):
        p.add_argument("--data-dir", help="directory of canonical YYYY-MM-DD.csv files")
        p.add_argument("--day", action="append", help="day to process (repeatable; default: all)")

    def bid_args(p):
        p.add_argument("--scenario", choices=["1", "2", "3", "all"], default="all")
        p.add_argument("--mode", choices=["hindsight", "forecast"], default="hindsight",
                       help="S3 bids from realized or forecast RTM prices")
        p.add_argument("--price-forecast-dir", help="canonical files whose rtm_price is the price forecast")

    p = sub.add_parser("synth", parents=[common], help="write seeded synthetic canonical days")
    p.add_argument("--out-dir")
    p.add_argument("--start", default="2022-01-01")
    p.add_argument("--days", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--capacity-mw", type=float, default=2000.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", parents=[common], help="raw ISO CSVs -> canonical daily files")
    p.add_argument("--dam")
    p.add_argument("--rtm")
    p.add_argument("--wind")
    p.add_argument("--forecast", help="optional wind forecast file (default: daily mean of actuals)")
    p.add_argument("--timestamp-column", default="Time Stamp")
    p.add_argument("--dam-column", default="value")
    p.add_argument("--rtm-column", default="value")
    p.add_argument("--wind-column", default="value")
    p.add_argument("--forecast-column", default="value")
    methods = [m.value for m in ingest.ResampleMethod]
    p.add_argument("--rtm-method", choices=methods, default="time_weighted_mean")
    p.add_argument("--wind-method", choices=methods, default="time_weighted_mean")
    p.add_argument("--max-fill-run", type=int, default=3)
    p.add_argument("--day", action="append")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("simulate", parents=[common], help="per-day, per-scenario profit and bid quantity")
    data_args(p)
    bid_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", parents=[common], help="hourly scenario-3 bid decisions")
    data_args(p)
    bid_args(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("reserve", parents=[common], help="dynamic reserve profile and break-even per scenario")
    data_args(p)
    p.add_argument("--scenario", choices=["1", "2", "3", "all"], default="all")
    p.add_argument("--alpha", type=float, default=reserve.DEFAULT_ALPHA)
    p.add_argument("--window-days", type=int, default=reserve.DEFAULT_WINDOW_DAYS)
    p.add_argument("--per", choices=[x.value for x in reserve.Pooling], default="hour_of_day")
    p.add_argument("--reserve-price", type=float, default=0.0)
    p.add_argument("--reserve-floor-mw", type=float, default=0.0)
    p.add_argument("--deviation-baseline", choices=[x.value for x in reserve.DeviationBaseline],
                   default="commitment")
    p.set_defaults(func=cmd_reserve)

    p = sub.add_parser("monitor", parents=[common], help="adherence indices, grades, capacity factors")
    data_args(p)
    p.add_argument("--producer", action="append", help="NAME=DIR of canonical files (repeatable)")
    p.add_argument("--commitment-source", choices=["forecast", "s3"], default="forecast")
    p.add_argument("--capacity", action="append", help="NAME=MW installed capacity (repeatable)")
    p.add_argument("--installed-capacity-mw", type=float, help="capacity for producers without --capacity")
    p.add_argument("--grade-a", type=float, default=monitor.DEFAULT_THRESHOLDS[0])
    p.add_argument("--grade-b", type=float, default=monitor.DEFAULT_THRESHOLDS[1])
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("report", parents=[common], help="plot-ready CSV tables")
    data_args(p)
    bid_args(p)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_report)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> None:
    pre = _Parser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    path = Path(known.config)
    if not path.is_file():
        raise FileNotFoundError(f"file not found: {path} (--config)")
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(cfg, dict):
        raise ConfigurationError(f"{path}: top level must be an object")
    flat = {k.replace("-", "_"): v for k, v in cfg.items() if not isinstance(v, dict)}
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for name, sp in subparsers.choices.items():
        section = {k.replace("-", "_"): v for k, v in cfg.get(name, {}).items()}
        dests = {a.dest for a in sp._actions}
        merged = {k: v for k, v in {**flat, **section}.items() if k in dests}
        unknown = set(section) - dests
        if unknown:
            raise ConfigurationError(f"{path}: unknown {name} settings {sorted(unknown)}")
        sp.set_defaults(**merged)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if not args.command:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_FILE
    except WindReserveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
