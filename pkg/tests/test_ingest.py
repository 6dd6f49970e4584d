import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import profile
from synthload import GeoPoint, HourlySeries, LoadBus
from synthload.desk import (
    COMMERCIAL_TYPES,
    generate_desk_corpus,
    residential_day_template,
)
from synthload.ingest import (
    DailySectorCurve,
    IndustrialFacilityRecord,
    IngestError,
    UtilitySalesRecord,
    format_bus_table,
    format_facilities,
    format_profile_values,
    format_sector_curves,
    format_series_csv,
    format_utilities,
    parse_bus_table,
    parse_facilities,
    parse_profile_values,
    parse_prototype_corpus,
    parse_sector_curves,
    parse_series_csv,
    parse_utilities,
    read_corpus,
    write_corpus,
)

finite = dict(allow_nan=False, allow_infinity=False)
geo = st.builds(GeoPoint, st.floats(-90, 90, **finite), st.floats(-180, 180, **finite))
ident = st.text("abcXYZ0123_-", min_size=1, max_size=12)


class TestBusTable:
    HEADER = "bus_id,lat,lon,peak_mw,power_factor\n"

    def test_one_row(self):
        buses = parse_bus_table(self.HEADER + "7,30.5,-97.25,120.0,0.95\n")
        assert buses == [LoadBus(7, GeoPoint(30.5, -97.25), 120.0, 0.95)]

    def test_duplicate_id(self):
        with pytest.raises(IngestError, match="line 3: duplicate bus_id 1"):
            parse_bus_table(self.HEADER + "1,0,0,1,1\n1,1,1,2,1\n")

    def test_negative_peak(self):
        with pytest.raises(IngestError, match="line 2: .*peak must be positive"):
            parse_bus_table(self.HEADER + "1,0,0,-3,0.9\n")

    def test_malformed_row_reports_line(self):
        with pytest.raises(IngestError, match="line 3"):
            parse_bus_table(self.HEADER + "1,0,0,1,1\n2,abc,0,1,1\n")
        with pytest.raises(IngestError, match="line 2: expected 5 fields"):
            parse_bus_table(self.HEADER + "1,0,0,1\n")

    def test_bad_header(self):
        with pytest.raises(IngestError, match="header"):
            parse_bus_table("id,lat,lon,peak,pf\n1,0,0,1,1\n")

    @given(st.lists(
        st.builds(LoadBus, st.integers(0, 10**6), geo, st.floats(1e-6, 1e6, **finite),
                  st.floats(1e-3, 1.0, **finite)),
        max_size=8, unique_by=lambda b: b.bus_id,
    ))
    @settings(max_examples=40)
    def test_round_trip(self, buses):
        assert parse_bus_table(format_bus_table(buses)) == buses


class TestTables:
    @given(st.lists(st.builds(
        IndustrialFacilityRecord, ident, st.sampled_from(["2011", "3312", "2911"]),
        st.floats(1e-3, 1e7, **finite), st.floats(1.0, 8760.0, **finite),
    ), max_size=6))
    @settings(max_examples=40)
    def test_facility_round_trip(self, recs):
        assert parse_facilities(format_facilities(recs)) == recs

    @given(st.lists(st.builds(
        UtilitySalesRecord, ident, geo,
        st.tuples(*[st.floats(0, 1e8, **finite)] * 3).filter(lambda t: sum(t) > 0),
    ), max_size=6))
    @settings(max_examples=40)
    def test_utility_round_trip(self, recs):
        assert parse_utilities(format_utilities(recs)) == recs

    def test_sector_curve_round_trip(self, rng):
        v = rng.random(24)
        curve = DailySectorCurve("3312", v / v.max())
        assert parse_sector_curves(format_sector_curves([curve])) == [curve]

    def test_sector_curve_peak_must_be_one(self):
        with pytest.raises(ValueError, match="peak must be 1.0"):
            DailySectorCurve("1", np.full(24, 0.5))

    def test_facility_invariants(self):
        with pytest.raises(ValueError):
            IndustrialFacilityRecord("f", "1", 0.0, 100)
        with pytest.raises(ValueError):
            IndustrialFacilityRecord("f", "1", 10.0, 9000)

    def test_utility_sales_invariants(self):
        with pytest.raises(ValueError):
            UtilitySalesRecord("u", GeoPoint(0, 0), (0, 0, 0))
        with pytest.raises(ValueError):
            UtilitySalesRecord("u", GeoPoint(0, 0), (1, -1, 0))


class TestProfiles:
    def test_profile_round_trip(self, rng):
        s = HourlySeries(rng.random(8760) * 3, "p")
        assert parse_profile_values(format_profile_values(s), "p") == s

    def test_short_profile(self):
        with pytest.raises(IngestError, match="expected 8760 values, got 8759"):
            parse_profile_values("1.0\n" * 8759, "p")

    def _manifest(self, tmp_path, entries, files):
        for name, values in files.items():
            (tmp_path / name).write_text("".join(f"{v}\n" for v in values))
        (tmp_path / "manifest.json").write_text(json.dumps(entries))
        return tmp_path / "manifest.json"

    def test_manifest_two_entries(self, tmp_path):
        entries = [
            {"file": "a.csv", "kind": "residential", "subtype": "residential", "lat": 30, "lon": -90, "region": "e"},
            {"file": "b.csv", "kind": "commercial", "subtype": "SmallOffice", "lat": 31, "lon": -91, "region": "e"},
        ]
        path = self._manifest(tmp_path, entries, {"a.csv": [1.0] * 8760, "b.csv": [2.0] * 8760})
        profiles = parse_prototype_corpus(path)
        assert [p.profile_id for p in profiles] == ["a", "b"]
        assert profiles[1].series.values[0] == 2.0

    def test_manifest_names_bad_file(self, tmp_path):
        entries = [{"file": "short.csv", "kind": "feeder", "subtype": "t", "lat": 0, "lon": 0, "region": "r"}]
        path = self._manifest(tmp_path, entries, {"short.csv": [1.0] * 8759})
        with pytest.raises(IngestError, match="short.csv.*got 8759"):
            parse_prototype_corpus(path)

    def test_empty_manifest_warns(self, tmp_path, caplog):
        path = self._manifest(tmp_path, [], {})
        assert parse_prototype_corpus(path) == []
        assert "no profiles" in caplog.text

    def test_residential_subtype_fixed(self):
        with pytest.raises(ValueError, match="subtype"):
            profile("p", "residential", np.ones(8760), subtype="apartment")


class TestSeriesCsv:
    def test_round_trip_with_reactive(self, rng):
        series = {3: HourlySeries(rng.random(8760) * 50, "3"), 1: HourlySeries(rng.random(8760), "1")}
        text = format_series_csv(series, power_factors={1: 0.9, 3: 1.0})
        assert text.splitlines()[0] == "bus_id,hour,p_mw,q_mvar"
        assert text.splitlines()[1].startswith("1,0,")
        back = parse_series_csv(text)
        assert back == series

    def test_reactive_value(self):
        series = {1: HourlySeries(np.full(8760, 10.0), "1")}
        row = format_series_csv(series, power_factors={1: 0.8}).splitlines()[1]
        q = float(row.split(",")[3])
        assert q == pytest.approx(7.5, rel=1e-12)  # 10 * tan(acos(0.8))

    def test_missing_hour(self):
        text = "bus_id,hour,p_mw\n1,0,1.0\n1,2,1.0\n"
        with pytest.raises(IngestError, match="hours must run"):
            parse_series_csv(text)


class TestDeskCorpus:
    def test_counts(self):
        corpus = generate_desk_corpus(7, 3, feeders_per_region=2)
        assert len(corpus.of_kind("residential")) == 3
        assert len(corpus.of_kind("commercial")) == 3 * 16
        assert len({c.name for c in COMMERCIAL_TYPES}) == 16

    def test_deterministic(self, tmp_path):
        a = generate_desk_corpus(11, 2, feeders_per_region=2, n_facilities=5)
        b = generate_desk_corpus(11, 2, feeders_per_region=2, n_facilities=5)
        write_corpus(tmp_path / "a", a)
        write_corpus(tmp_path / "b", b)
        files_a = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
        files_b = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*") if p.is_file())
        assert files_a == files_b
        for rel in files_a:
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()

    def test_write_read_round_trip(self, tmp_path):
        corpus = generate_desk_corpus(3, 2, feeders_per_region=3, n_facilities=4)
        write_corpus(tmp_path, corpus)
        back = read_corpus(tmp_path)
        assert back.profiles == corpus.profiles
        assert back.facilities == corpus.facilities
        assert back.curves == corpus.curves
        assert back.utilities == corpus.utilities

    @staticmethod
    def _local_maxima(day):
        return sum(day[h] > day[h - 1] and day[h] > day[(h + 1) % 24] for h in range(24))

    @pytest.mark.parametrize("coldness", [0.0, 0.5, 1.0])
    def test_winter_two_peaks_summer_one(self, coldness):
        # First week of January and first week of July.
        for d in range(0, 7):
            assert self._local_maxima(residential_day_template(d, coldness)) == 2
        for d in range(181, 188):
            assert self._local_maxima(residential_day_template(d, coldness)) == 1

    def test_weekday_weekend_contrast(self):
        corpus = generate_desk_corpus(5, 1, feeders_per_region=1)
        by_type = {p.subtype: p.series.values.reshape(365, 24) for p in corpus.of_kind("commercial")}
        # Jan 1 is a Monday: days 5 and 6 are the first weekend.
        office = by_type["LargeOffice"]
        assert office[5:7].mean() < 0.6 * office[0:5].mean()
        hospital = by_type["Hospital"]
        assert hospital[5:7].mean() > 0.9 * hospital[0:5].mean()

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=5, deadline=None)
    def test_any_seed_satisfies_invariants(self, seed):
        corpus = generate_desk_corpus(seed, 1, feeders_per_region=1, n_facilities=3)
        for c in corpus.curves:
            assert c.per_unit_values.max() == pytest.approx(1.0, abs=1e-9)
        assert all(p.series.values.min() >= 0 for p in corpus.profiles)
        assert all(sum(u.sales_mwh) > 0 for u in corpus.utilities)
