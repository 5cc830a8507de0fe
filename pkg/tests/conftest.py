from __future__ import annotations

from datetime import date

import numpy as np
import pytest
from hypothesis import strategies as st

from windreserve.market_model import (
    DamPriceSeries,
    MarketSeries,
    RtmPriceSeries,
    WindActualSeries,
    WindForecast,
    align_horizon,
    build_time_grid,
)

DAY = date(2022, 1, 15)


def make_series(dam, rtm, wind, forecast, intervals_per_hour=4, day=DAY, tz="UTC") -> MarketSeries:
    """Build a MarketSeries, broadcasting scalars / single-hour lists over the whole day."""
    grid = build_time_grid(day, intervals_per_hour, tz)
    n = grid.n_intervals

    def expand(x, length):
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        if arr.size == length:
            return arr
        return np.resize(arr, length)

    return align_horizon(
        DamPriceSeries(expand(dam, 24)),
        RtmPriceSeries(expand(rtm, n)),
        WindActualSeries(expand(wind, n)),
        WindForecast(expand(forecast, 24)),
        grid,
    )


def random_day(rng: np.random.Generator, intervals_per_hour: int = 4, day=DAY,
               price_lo=-50.0, price_hi=800.0, w_max=2000.0) -> MarketSeries:
    n = 24 * intervals_per_hour
    return make_series(
        rng.uniform(price_lo, price_hi, 24),
        rng.uniform(price_lo, price_hi, n),
        rng.uniform(0, w_max, n),
        rng.uniform(0, w_max, 24),
        intervals_per_hour,
        day,
    )


prices = st.floats(-50, 800, allow_nan=False, allow_infinity=False)
powers = st.floats(0, 2000, allow_nan=False, allow_infinity=False)


@st.composite
def market_days(draw, intervals_per_hour=st.sampled_from([1, 2, 4, 12])):
    iph = draw(intervals_per_hour)
    seed = draw(st.integers(0, 2**32 - 1))
    return random_day(np.random.default_rng(seed), iph)


@pytest.fixture
def rng():
    return np.random.default_rng(20221015)


# -- acceptance reporting ---------------------------------------------------

_CRITERIA: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion label")


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    prev = _CRITERIA.get(report.nodeid, (marker, "PASS"))[1]
    if report.when == "call" or report.outcome != "passed":
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        if prev != "PASS":
            status = prev
        _CRITERIA[report.nodeid] = (marker, status)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        report.criterion = mark.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, status in sorted(_CRITERIA.values()):
        terminalreporter.write_line(f"{status}  {label}")
