import csv
import io
import json
from datetime import date, datetime, timedelta, timezone

import numpy as np
import pytest

from windreserve.cli import main
from windreserve.ingest import read_canonical, write_canonical
from windreserve.settlement import Strategy, settle_day
from windreserve.synth import generate_days

from conftest import make_series

SEASON_DAYS = [date(2022, 1, 15), date(2022, 4, 15), date(2022, 7, 15), date(2022, 10, 15)]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def synth_dir(tmp_path, capsys):
    d = tmp_path / "data"
    assert run(capsys, "synth", "--out-dir", d, "--days", 31, "--seed", 4, "--start", "2022-01-01")[0] == 0
    return d


@pytest.fixture
def season_dir(tmp_path):
    d = tmp_path / "seasons"
    d.mkdir()
    for k, day in enumerate(SEASON_DAYS):
        series = generate_days(day, 1, seed=100 + k)[0]
        write_canonical(series, d / f"{day.isoformat()}.csv")
    return d


# ---- ingest

def _write_raw(tmp_path, day=date(2022, 1, 15), gap=0, tz_local=False):
    start = datetime(day.year, day.month, day.day, tzinfo=timezone.utc)
    fmt = lambda t: t.strftime("%Y-%m-%dT%H:%M:%SZ")
    rng = np.random.default_rng(0)
    dam = ["Time Stamp,value"] + [f"{fmt(start + timedelta(hours=h))},{40 + h}" for h in range(24)]
    rtm, wind = ["Time Stamp,value"], ["Time Stamp,value"]
    for k in range(288):
        t = fmt(start + timedelta(minutes=5 * k))
        rtm.append(f"{t},{rng.uniform(20, 80):.3f}")
        value = "N/A" if 100 <= k < 100 + gap else f"{rng.uniform(0, 1500):.3f}"
        wind.append(f"{t},{value}")
    paths = {}
    for name, lines in (("dam", dam), ("rtm", rtm), ("wind", wind)):
        paths[name] = tmp_path / f"{name}.csv"
        paths[name].write_text("\n".join(lines) + "\n")
    return paths


def test_ingest_one_day(tmp_path, capsys):
    p = _write_raw(tmp_path, gap=2)
    out_dir = tmp_path / "canon"
    code, out, _ = run(capsys, "ingest", "--dam", p["dam"], "--rtm", p["rtm"], "--wind", p["wind"],
                       "--out-dir", out_dir)
    assert code == 0
    assert "1 day file(s), 96 rows, 2 gaps filled, 0 duplicates dropped" in out
    series = read_canonical(out_dir / "2022-01-15.csv")
    assert series.grid.n_intervals == 96
    assert np.array_equal(series.dam.values, np.arange(24.0) + 40)


def test_ingest_missing_wind_file(tmp_path, capsys):
    p = _write_raw(tmp_path)
    code, _, err = run(capsys, "ingest", "--dam", p["dam"], "--rtm", p["rtm"],
                       "--wind", tmp_path / "nope.csv", "--out-dir", tmp_path / "o")
    assert code == 2
    assert "file not found" in err


def test_ingest_gap_too_long(tmp_path, capsys):
    p = _write_raw(tmp_path, gap=4)
    code, _, err = run(capsys, "ingest", "--dam", p["dam"], "--rtm", p["rtm"], "--wind", p["wind"],
                       "--out-dir", tmp_path / "o")
    assert code == 3
    assert "wind.csv" in err and "length 4" in err and "2022-01-15T08:20" in err


def test_ingest_parse_error_names_line(tmp_path, capsys):
    p = _write_raw(tmp_path)
    lines = p["rtm"].read_text().splitlines()
    lines[9] = lines[9].split(",")[0] + ",oops"
    p["rtm"].write_text("\n".join(lines) + "\n")
    code, _, err = run(capsys, "ingest", "--dam", p["dam"], "--rtm", p["rtm"], "--wind", p["wind"],
                       "--out-dir", tmp_path / "o")
    assert code == 3
    assert "rtm.csv" in err and "line 10" in err


# ---- simulate / optimize

def test_simulate_four_seasons(season_dir, capsys):
    code, out, _ = run(capsys, "simulate", "--data-dir", season_dir)
    assert code == 0
    rows = rows_of(out)
    assert sum(r["metric"] == "profit" for r in rows) == 12
    assert sum(r["metric"] == "bid_quantity" for r in rows) == 12
    for day in SEASON_DAYS:
        profit = {r["scenario"]: float(r["value"]) for r in rows
                  if r["day"] == day.isoformat() and r["metric"] == "profit"}
        assert profit["S3"] >= max(profit["S1"], profit["S2"]) - 1e-9 * abs(profit["S3"])


def test_simulate_matches_library_exactly(season_dir, capsys):
    _, out, _ = run(capsys, "simulate", "--data-dir", season_dir, "--day", "2022-04-15", "--format", "json")
    series = read_canonical(season_dir / "2022-04-15.csv")
    lib = {
        "S1": settle_day(series, Strategy.S1),
        "S2": settle_day(series, Strategy.S2),
        "S3": settle_day(series, Strategy.S3_CLOSED_FORM),
    }
    for r in json.loads(out):
        want = lib[r["scenario"]]
        assert r["value"] == (want.total_profit if r["metric"] == "profit" else want.total_q)


def test_simulate_constant_price_day_all_equal(tmp_path, capsys):
    d = tmp_path / "flat"
    d.mkdir()
    rng = np.random.default_rng(3)
    write_canonical(make_series(50.0, 50.0, rng.uniform(0, 100, 96), 40.0), d / "2022-01-15.csv")
    _, out, _ = run(capsys, "simulate", "--data-dir", d)
    profit = [float(r["value"]) for r in rows_of(out) if r["metric"] == "profit"]
    assert profit[0] == pytest.approx(profit[1], rel=1e-12) and profit[1] == pytest.approx(profit[2], rel=1e-12)


def test_simulate_single_scenario_and_missing_day(season_dir, capsys):
    code, out, _ = run(capsys, "simulate", "--data-dir", season_dir, "--scenario", "2")
    assert code == 0 and {r["scenario"] for r in rows_of(out)} == {"S2"}
    code, _, err = run(capsys, "simulate", "--data-dir", season_dir, "--day", "2022-02-01")
    assert code == 4 and "2022-02-01" in err


def test_simulate_forecast_mode(season_dir, tmp_path, capsys):
    code, _, err = run(capsys, "simulate", "--data-dir", season_dir, "--mode", "forecast")
    assert code == 1 and "price-forecast-dir" in err
    # using realized prices as the "forecast" must reproduce hindsight bids
    code, out, _ = run(capsys, "simulate", "--data-dir", season_dir, "--mode", "forecast",
                       "--price-forecast-dir", season_dir, "--scenario", "3")
    assert code == 0
    _, hind, _ = run(capsys, "simulate", "--data-dir", season_dir, "--scenario", "3")
    assert [r["value"] for r in rows_of(out)] == [r["value"] for r in rows_of(hind)]
    assert {r["mode"] for r in rows_of(out)} == {"forecast"}


def test_optimize_outputs_24_decisions(season_dir, capsys):
    code, out, _ = run(capsys, "optimize", "--data-dir", season_dir, "--day", "2022-07-15")
    rows = rows_of(out)
    assert code == 0 and len(rows) == 24
    for r in rows:
        assert r["regime"] in {"BID_ZERO", "BID_FULL", "INDIFFERENT"}
        if r["regime"] == "BID_FULL":
            assert float(r["dam_price"]) > float(r["rtm_hour_sum"])


# ---- reserve

def test_reserve_profile_shape(synth_dir, capsys):
    code, out, _ = run(capsys, "reserve", "--data-dir", synth_dir, "--alpha", 0.975, "--reserve-price", 5)
    assert code == 0
    rows = rows_of(out)
    for sc in ("S1", "S2", "S3"):
        profile = [r for r in rows if r["scenario"] == sc and r["metric"] == "reserve_mw"]
        assert len(profile) == 24
        assert [int(r["hour"]) for r in profile] == list(range(24))
    s2 = [float(r["value"]) for r in rows if r["scenario"] == "S2" and r["metric"] == "reserve_mw"]
    assert s2 == [0.0] * 24


def test_reserve_alpha_monotone(synth_dir, capsys):
    def profile(alpha):
        _, out, _ = run(capsys, "reserve", "--data-dir", synth_dir, "--alpha", alpha, "--format", "json")
        return json.loads(out)["reports"]

    lo, hi = profile(0.5), profile(0.975)
    for sc in lo:
        assert np.all(np.array(lo[sc]["reserve_mw"]) <= np.array(hi[sc]["reserve_mw"]))


def test_reserve_all_surplus_history(tmp_path, capsys):
    d = tmp_path / "surplus"
    d.mkdir()
    for k in range(3):
        day = date(2022, 1, 1) + timedelta(days=k)
        # forecast far below output -> every committed schedule is over-delivered
        write_canonical(make_series(60.0, 40.0, 500.0, 100.0, day=day), d / f"{day}.csv")
    code, out, _ = run(capsys, "reserve", "--data-dir", d, "--window-days", 3)
    assert code == 0
    assert all(float(r["value"]) == 0.0 for r in rows_of(out) if r["metric"] == "reserve_mw")


def test_reserve_insufficient_history(synth_dir, capsys):
    code, _, err = run(capsys, "reserve", "--data-dir", synth_dir, "--window-days", 40)
    assert code == 5
    assert "40 days required, 31 available" in err


def test_reserve_floor_and_baseline(synth_dir, capsys):
    _, out, _ = run(capsys, "reserve", "--data-dir", synth_dir, "--reserve-floor-mw", 100,
                    "--deviation-baseline", "forecast", "--format", "json")
    rep = json.loads(out)["reports"]
    assert min(rep["S2"]["reserve_mw"]) >= 100.0
    assert rep["S2"]["reserve_mw"] == rep["S1"]["reserve_mw"]


# ---- monitor

def _producer_dir(tmp_path, name, wind, forecast, months=(1,)):
    d = tmp_path / name
    d.mkdir()
    for m in months:
        day = date(2022, m, 15)
        write_canonical(make_series(50.0, 40.0, wind, forecast, day=day), d / f"{day}.csv")
    return d


def test_monitor_grades(tmp_path, capsys):
    perfect = _producer_dir(tmp_path, "perfect", 100.0, 100.0)
    short = _producer_dir(tmp_path, "short", 90.0, 100.0)
    code, out, _ = run(capsys, "monitor", "--producer", f"perfect={perfect}", "--producer", f"short={short}")
    assert code == 0
    rep = json.loads(out)["producers"]
    assert rep["perfect"]["adherence"] == 1.0 and rep["perfect"]["grade"] == "A"
    assert rep["short"]["adherence"] == 0.9 and rep["short"]["grade"] == "B"
    assert rep["short"]["bias_mw"] == 10.0


def test_monitor_capacity_factors(tmp_path, capsys):
    full = _producer_dir(tmp_path, "full", 2000.0, 2000.0, months=(1, 4, 7, 10))
    code, out, _ = run(capsys, "monitor", "--producer", f"full={full}", "--capacity", "full=2000")
    cf = json.loads(out)["producers"]["full"]["capacity_factor"]
    assert code == 0
    assert {k: v["mean"] for k, v in cf["seasons"].items()} == {
        "fall": 1.0, "spring": 1.0, "summer": 1.0, "winter": 1.0}


def test_monitor_csv_and_bad_pairs(tmp_path, capsys):
    perfect = _producer_dir(tmp_path, "perfect", 100.0, 100.0)
    code, out, _ = run(capsys, "monitor", "--producer", f"p={perfect}", "--format", "csv")
    assert code == 0 and rows_of(out)[0]["grade"] == "A"
    assert run(capsys, "monitor", "--producer", "noequals")[0] == 1
    assert run(capsys, "monitor", "--producer", f"p={perfect}", "--grade-a", 0.5, "--grade-b", 0.9)[0] == 1


# ---- report, config, usage

def test_report_writes_plot_tables(season_dir, tmp_path, capsys):
    out_dir = tmp_path / "fig"
    code, _, _ = run(capsys, "report", "--data-dir", season_dir, "--out-dir", out_dir)
    assert code == 0
    profiles = rows_of((out_dir / "profiles.csv").read_text())
    assert len(profiles) == 4 * 96
    bars = rows_of((out_dir / "scenario_bars.csv").read_text())
    assert len(bars) == 24


def test_config_file_precedence(synth_dir, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"format": "json", "reserve": {"window-days": 5, "alpha": 0.5}}))
    _, out, _ = run(capsys, "reserve", "--data-dir", synth_dir, "--config", cfg)
    doc = json.loads(out)
    assert doc["alpha"] == 0.5
    assert "(5 days)" in doc["reports"]["S1"]["window"]
    _, out, _ = run(capsys, "reserve", "--data-dir", synth_dir, "--config", cfg, "--alpha", 0.9, "--format", "csv")
    assert out.startswith("day,scenario,hour,metric,value")


def test_config_errors(tmp_path, capsys):
    assert run(capsys, "simulate", "--config", tmp_path / "none.json")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"reserve": {"no_such_flag": 1}}))
    assert run(capsys, "reserve", "--config", bad)[0] == 1


def test_usage_errors(tmp_path, capsys):
    assert run(capsys)[0] == 1
    assert run(capsys, "simulate", "--scenario", "7")[0] == 1
    assert run(capsys, "simulate")[0] == 1
    assert run(capsys, "synth", "--out-dir", tmp_path / "x", "--intervals-per-hour", 0)[0] == 1
    assert not (tmp_path / "x").exists()
