"""Profit and bid quantity for the four seasonal days, plus the reserve each strategy needs.

    python3 scripts/seasonal_study.py                      # synthetic days
    python3 scripts/seasonal_study.py --data-dir DIR       # canonical files named YYYY-MM-DD.csv
"""
import argparse
from datetime import date, timedelta
from pathlib import Path

from windreserve.ingest import read_canonical
from windreserve.reserve import scenario_reserve_comparison
from windreserve.settlement import Strategy, settle_day
from windreserve.synth import generate_days

DAYS = (date(2022, 1, 15), date(2022, 4, 15), date(2022, 7, 15), date(2022, 10, 15))
STRATEGIES = (Strategy.S1, Strategy.S2, Strategy.S3_CLOSED_FORM)


def load(day, data_dir, window, seed):
    if data_dir is None:
        return generate_days(day - timedelta(days=window - 1), window, seed=seed + day.toordinal())
    paths = [data_dir / f"{day - timedelta(days=k)}.csv" for k in reversed(range(window))]
    return [read_canonical(p) for p in paths if p.is_file()]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data-dir", type=Path)
    ap.add_argument("--window-days", type=int, default=30)
    ap.add_argument("--alpha", type=float, default=0.975)
    ap.add_argument("--reserve-price", type=float, default=8.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'day':<12}{'scenario':<10}{'profit':>14}{'bid MWh':>12}{'reserve MWh':>13}{'margin':>14}")
    for day in DAYS:
        history = load(day, args.data_dir, args.window_days, args.seed)
        if not history or history[-1].grid.day != day:
            print(f"{day}  no data")
            continue
        target = history[-1]
        reports = scenario_reserve_comparison(target, history, alpha=args.alpha, reserve_price=args.reserve_price)
        for strat in STRATEGIES:
            s = settle_day(target, strat)
            r = reports[strat.scenario]
            print(f"{str(day):<12}{strat.scenario:<10}{s.total_profit:>14.2f}{s.total_q:>12.1f}"
                  f"{sum(r.reserve_mw):>13.1f}{r.breakeven_margin:>14.2f}")
        s3 = settle_day(target, Strategy.S3_CLOSED_FORM).total_profit
        best = max(settle_day(target, Strategy.S1).total_profit, settle_day(target, Strategy.S2).total_profit)
        if best > 0:
            print(f"{'':<12}S3 gain over best of S1/S2: {100 * (s3 / best - 1):.1f}%")


if __name__ == "__main__":
    main()
