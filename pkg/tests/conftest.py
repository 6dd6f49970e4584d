import time
from pathlib import Path

import numpy as np
import pytest

from synthload import GeoPoint, HourlySeries, LoadBus
from synthload.cli import main
from synthload.ingest import PrototypeProfile

DESK_SEED = 42
N = 8760


def constant(value, label=""):
    return HourlySeries(np.full(N, float(value)), label)


def alternating(lo, hi, label=""):
    v = np.empty(N)
    v[0::2] = lo
    v[1::2] = hi
    return HourlySeries(v, label)


def profile(pid, kind, values, loc=(30.0, -100.0), subtype=None, region="r"):
    subtype = subtype or ("residential" if kind == "residential" else "x")
    location = None if loc is None else GeoPoint(*loc)
    series = values if isinstance(values, HourlySeries) else HourlySeries(values, pid)
    return PrototypeProfile(pid, kind, subtype, location, region, series)


def bus(bus_id=1, lat=30.0, lon=-100.0, peak=10.0, pf=0.95):
    return LoadBus(bus_id, GeoPoint(lat, lon), peak, pf)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def desk_run(tmp_path_factory):
    """One CLI desk pipeline (gen-corpus, synth, validate, scenario), seed 42, 50 buses."""
    root = tmp_path_factory.mktemp("desk")
    corpus, synth, val, scen = (root / n for n in ("corpus", "synth", "validate", "scenario"))
    assert main(["gen-corpus", "--seed", str(DESK_SEED), "--buses", "50", "--out", str(corpus)]) == 0
    t0 = time.perf_counter()
    assert main(["synth", "--corpus", str(corpus), "--seed", str(DESK_SEED), "--out", str(synth)]) == 0
    synth_seconds = time.perf_counter() - t0
    assert main(["validate", "--series", str(synth / "series.csv"), "--out", str(val)]) == 0
    assert main([
        "scenario", "--series", str(synth / "series.csv"), "--buses", str(corpus / "buses.csv"),
        "--metadata", str(synth / "metadata.json"), "--solar", str(corpus / "solar.csv"),
        "--seed", str(DESK_SEED), "--out", str(scen),
    ]) == 0
    return {
        "root": root, "corpus": corpus, "synth": synth, "validate": val, "scenario": scen,
        "synth_seconds": synth_seconds,
    }


def read(path: Path) -> str:
    return Path(path).read_text()


# ---------------------------------------------------------------------------
# acceptance summary: one pass/fail line per numbered criterion

_criteria: dict[int, dict] = {}


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    n, title = marker
    entry = _criteria.setdefault(n, {"title": title, "ok": True, "ran": False})
    if report.when == "call":
        entry["ran"] = True
    if report.failed:
        entry["ok"] = False


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        entry = _criteria[n]
        status = "PASS" if entry["ok"] and entry["ran"] else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {entry['title']}")
