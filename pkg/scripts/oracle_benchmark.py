"""Time the closed-form bid against the grid-search oracle on random hours."""
import argparse
import time
from datetime import date

import numpy as np

from windreserve.bid_optimizer import optimal_bid_bruteforce, optimal_bid_closed_form
from windreserve.settlement import settle_scenario3_given_q
from windreserve.synth import generate_days


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--days", type=int, default=100)
    ap.add_argument("--grid-points", type=int, default=1001)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    days = generate_days(date(2022, 1, 1), args.days, seed=args.seed)
    gaps = []
    t_cf = t_bf = 0.0
    for series in days:
        for h in range(24):
            t0 = time.perf_counter()
            q = optimal_bid_closed_form(series, h).q_star
            cf = settle_scenario3_given_q(series, h, q).profit
            t1 = time.perf_counter()
            _, bf = optimal_bid_bruteforce(series, h, args.grid_points)
            t2 = time.perf_counter()
            t_cf += t1 - t0
            t_bf += t2 - t1
            gaps.append(cf - bf)
    gaps = np.array(gaps)
    print(f"hours: {gaps.size}")
    print(f"closed form: {t_cf:.3f} s   grid search ({args.grid_points} pts): {t_bf:.3f} s")
    print(f"closed - grid profit: min {gaps.min():.3e}  max {gaps.max():.3e}")


if __name__ == "__main__":
    main()
