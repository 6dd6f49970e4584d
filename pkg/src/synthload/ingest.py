"""Parsers and writers for the CSV/JSON input formats.

Every ``parse_*`` function has a ``format_*`` counterpart and the pair
round-trips exactly: floats are written with ``repr`` (shortest string that
reads back to the same double).
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .types import HOURS_PER_YEAR, GeoPoint, HourlySeries, LoadBus

log = logging.getLogger(__name__)

PROFILE_KINDS = ("residential", "commercial", "industrial", "feeder")

BUS_HEADER = ["bus_id", "lat", "lon", "peak_mw", "power_factor"]
FACILITY_HEADER = ["facility_id", "sector_code", "annual_energy_mwh", "annual_operating_hours"]
CURVE_HEADER = ["sector_code"] + [f"h{h}" for h in range(24)]
UTILITY_HEADER = ["utility_id", "lat", "lon", "res_mwh", "com_mwh", "ind_mwh"]
SERIES_HEADER = ["bus_id", "hour", "p_mw"]


class IngestError(ValueError):
    """Malformed input data; the message names the file and/or line."""


@dataclass(frozen=True)
class PrototypeProfile:
    profile_id: str
    kind: str
    subtype: str
    location: GeoPoint | None  # None for industrial facilities, which carry no site
    region: str
    series: HourlySeries

    def __post_init__(self) -> None:
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"profile {self.profile_id}: unknown kind {self.kind!r}")
        if self.kind == "residential" and self.subtype != "residential":
            raise ValueError(
                f"profile {self.profile_id}: residential profiles must have subtype 'residential'"
            )
        if self.location is None and self.kind != "industrial":
            raise ValueError(f"profile {self.profile_id}: {self.kind} profiles need a location")


@dataclass(frozen=True)
class IndustrialFacilityRecord:
    facility_id: str
    sector_code: str
    annual_energy_mwh: float
    annual_operating_hours: float

    def __post_init__(self) -> None:
        if not self.annual_energy_mwh > 0:
            raise ValueError(f"facility {self.facility_id}: annual energy must be positive")
        if not 0 < self.annual_operating_hours <= HOURS_PER_YEAR:
            raise ValueError(
                f"facility {self.facility_id}: operating hours must lie in (0, {HOURS_PER_YEAR}]"
            )


@dataclass(frozen=True, eq=False)
class DailySectorCurve:
    sector_code: str
    per_unit_values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.per_unit_values, dtype=np.float64)
        if arr.shape != (24,):
            raise ValueError(f"sector {self.sector_code}: daily curve needs 24 points")
        if np.any(arr < 0) or np.any(arr > 1):
            raise ValueError(f"sector {self.sector_code}: per-unit values must lie in [0, 1]")
        if abs(arr.max() - 1.0) > 1e-9:
            raise ValueError(f"sector {self.sector_code}: daily curve peak must be 1.0")
        arr.flags.writeable = False
        object.__setattr__(self, "per_unit_values", arr)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DailySectorCurve):
            return NotImplemented
        return self.sector_code == other.sector_code and np.array_equal(
            self.per_unit_values, other.per_unit_values
        )


@dataclass(frozen=True)
class UtilitySalesRecord:
    utility_id: str
    centroid: GeoPoint
    sales_mwh: tuple[float, float, float]

    def __post_init__(self) -> None:
        sales = tuple(float(v) for v in self.sales_mwh)
        if len(sales) != 3 or any(v < 0 for v in sales):
            raise ValueError(f"utility {self.utility_id}: sales must be three values >= 0")
        if sum(sales) <= 0:
            raise ValueError(f"utility {self.utility_id}: total sales must be positive")
        object.__setattr__(self, "sales_mwh", sales)


@dataclass
class Corpus:
    """Everything the synthesis stage reads besides the bus table."""

    profiles: list[PrototypeProfile] = field(default_factory=list)
    facilities: list[IndustrialFacilityRecord] = field(default_factory=list)
    curves: list[DailySectorCurve] = field(default_factory=list)
    utilities: list[UtilitySalesRecord] = field(default_factory=list)

    def of_kind(self, kind: str) -> list[PrototypeProfile]:
        return [p for p in self.profiles if p.kind == kind]


def fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# generic CSV plumbing


def _rows(text: str, header: Sequence[str], what: str) -> Iterable[tuple[int, list[str]]]:
    reader = csv.reader(io.StringIO(text))
    try:
        first = next(reader)
    except StopIteration:
        raise IngestError(f"{what}: empty input, expected header {','.join(header)}") from None
    if [c.strip() for c in first] != list(header):
        raise IngestError(
            f"{what}: line 1: expected header {','.join(header)}, got {','.join(first)}"
        )
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise IngestError(
                f"{what}: line {lineno}: expected {len(header)} fields, got {len(row)}"
            )
        yield lineno, [c.strip() for c in row]


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _field_error(what: str, lineno: int, exc: Exception) -> IngestError:
    return IngestError(f"{what}: line {lineno}: {exc}")


# ---------------------------------------------------------------------------
# bus table


def parse_bus_table(text: str) -> list[LoadBus]:
    buses: list[LoadBus] = []
    seen: set[int] = set()
    for lineno, (bid, lat, lon, peak, pf) in _rows(text, BUS_HEADER, "bus table"):
        try:
            bus = LoadBus(int(bid), GeoPoint(float(lat), float(lon)), float(peak), float(pf))
        except ValueError as exc:
            raise _field_error("bus table", lineno, exc) from None
        if bus.bus_id in seen:
            raise IngestError(f"bus table: line {lineno}: duplicate bus_id {bus.bus_id}")
        seen.add(bus.bus_id)
        buses.append(bus)
    return buses


def format_bus_table(buses: Iterable[LoadBus]) -> str:
    return _csv_text(
        BUS_HEADER,
        (
            [b.bus_id, fmt(b.location.latitude), fmt(b.location.longitude),
             fmt(b.peak_mw), fmt(b.power_factor)]
            for b in buses
        ),
    )


# ---------------------------------------------------------------------------
# facility / sector curve / utility tables


def parse_facilities(text: str) -> list[IndustrialFacilityRecord]:
    out = []
    for lineno, (fid, code, energy, hours) in _rows(text, FACILITY_HEADER, "facility table"):
        try:
            out.append(IndustrialFacilityRecord(fid, code, float(energy), float(hours)))
        except ValueError as exc:
            raise _field_error("facility table", lineno, exc) from None
    return out


def format_facilities(records: Iterable[IndustrialFacilityRecord]) -> str:
    return _csv_text(
        FACILITY_HEADER,
        (
            [r.facility_id, r.sector_code, fmt(r.annual_energy_mwh), fmt(r.annual_operating_hours)]
            for r in records
        ),
    )


def parse_sector_curves(text: str) -> list[DailySectorCurve]:
    out = []
    for lineno, row in _rows(text, CURVE_HEADER, "sector curve table"):
        try:
            out.append(DailySectorCurve(row[0], np.array([float(v) for v in row[1:]])))
        except ValueError as exc:
            raise _field_error("sector curve table", lineno, exc) from None
    return out


def format_sector_curves(curves: Iterable[DailySectorCurve]) -> str:
    return _csv_text(
        CURVE_HEADER, ([c.sector_code] + [fmt(v) for v in c.per_unit_values] for c in curves)
    )


def parse_utilities(text: str) -> list[UtilitySalesRecord]:
    out = []
    for lineno, (uid, lat, lon, res, com, ind) in _rows(text, UTILITY_HEADER, "utility table"):
        try:
            out.append(
                UtilitySalesRecord(
                    uid, GeoPoint(float(lat), float(lon)), (float(res), float(com), float(ind))
                )
            )
        except ValueError as exc:
            raise _field_error("utility table", lineno, exc) from None
    return out


def format_utilities(records: Iterable[UtilitySalesRecord]) -> str:
    return _csv_text(
        UTILITY_HEADER,
        (
            [u.utility_id, fmt(u.centroid.latitude), fmt(u.centroid.longitude)]
            + [fmt(v) for v in u.sales_mwh]
            for u in records
        ),
    )


# ---------------------------------------------------------------------------
# single-profile files and the manifest


def parse_profile_values(text: str, name: str = "profile") -> HourlySeries:
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise IngestError(f"{name}: line {lineno}: not a number: {line!r}") from None
    if len(values) != HOURS_PER_YEAR:
        raise IngestError(f"{name}: expected {HOURS_PER_YEAR} values, got {len(values)}")
    try:
        return HourlySeries(np.array(values), name)
    except ValueError as exc:
        raise IngestError(f"{name}: {exc}") from None


def format_profile_values(series: HourlySeries) -> str:
    return "".join(fmt(v) + "\n" for v in series.values)


def parse_prototype_corpus(manifest: str | os.PathLike) -> list[PrototypeProfile]:
    """Load the profiles listed in a manifest JSON file.

    Profile paths in the manifest are resolved relative to the manifest's
    directory.
    """
    manifest = Path(manifest)
    try:
        entries = json.loads(manifest.read_text())
    except json.JSONDecodeError as exc:
        raise IngestError(f"{manifest}: invalid JSON: {exc}") from None
    if not isinstance(entries, list):
        raise IngestError(f"{manifest}: manifest must be a JSON array")
    if not entries:
        log.warning("manifest %s lists no profiles", manifest)
        return []
    base = manifest.parent
    profiles = []
    for i, entry in enumerate(entries):
        try:
            rel = entry["file"]
            path = base / rel
            pid = str(entry.get("profile_id", Path(rel).with_suffix("").as_posix()))
            series = parse_profile_values(path.read_text(), str(path))
            profiles.append(
                PrototypeProfile(
                    profile_id=pid,
                    kind=entry["kind"],
                    subtype=entry["subtype"],
                    location=_entry_location(entry),
                    region=str(entry["region"]),
                    series=HourlySeries(series.values, pid),
                )
            )
        except KeyError as exc:
            raise IngestError(f"{manifest}: entry {i}: missing field {exc}") from None
        except OSError as exc:
            raise IngestError(f"{manifest}: entry {i}: {exc}") from None
        except IngestError:
            raise
        except ValueError as exc:
            raise IngestError(f"{manifest}: entry {i}: {exc}") from None
    return profiles


def _entry_location(entry: dict) -> GeoPoint | None:
    if entry["lat"] is None and entry["lon"] is None:
        return None
    return GeoPoint(float(entry["lat"]), float(entry["lon"]))


def manifest_entry(profile: PrototypeProfile, file: str) -> dict:
    loc = profile.location
    return {
        "profile_id": profile.profile_id,
        "file": file,
        "kind": profile.kind,
        "subtype": profile.subtype,
        "lat": None if loc is None else loc.latitude,
        "lon": None if loc is None else loc.longitude,
        "region": profile.region,
    }


# ---------------------------------------------------------------------------
# long-format bus series


def format_series_csv(
    series: Mapping[int, HourlySeries],
    power_factors: Mapping[int, float] | None = None,
    hours: int | None = None,
) -> str:
    """Long format ``bus_id,hour,p_mw`` in bus_id order.

    With ``power_factors`` a ``q_mvar`` column is appended, computed at the
    bus's fixed power factor.  ``hours`` truncates each series (used for
    day-long scenario output, where values are plain arrays).
    """
    header = list(SERIES_HEADER)
    if power_factors is not None:
        header.append("q_mvar")
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for bus_id in sorted(series):
        s = series[bus_id]
        values = s.values if isinstance(s, HourlySeries) else np.asarray(s, dtype=np.float64)
        if hours is not None:
            values = values[:hours]
        if power_factors is None:
            buf.writelines(f"{bus_id},{h},{fmt(v)}\n" for h, v in enumerate(values))
        else:
            tan_phi = np.tan(np.arccos(power_factors[bus_id]))
            q = values * tan_phi
            buf.writelines(
                f"{bus_id},{h},{fmt(v)},{fmt(qv)}\n" for h, (v, qv) in enumerate(zip(values, q))
            )
    return buf.getvalue()


def parse_series_table(text: str) -> dict[int, np.ndarray]:
    """Read a long-format series CSV into ``{bus_id: values}`` arrays of any length."""
    lines = text.splitlines()
    if not lines:
        raise IngestError("series table: empty input")
    header = [c.strip() for c in lines[0].split(",")]
    if header[:3] != SERIES_HEADER or len(header) > 4:
        raise IngestError(f"series table: line 1: expected header {','.join(SERIES_HEADER)}")
    cols: dict[int, dict[int, float]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise IngestError(f"series table: line {lineno}: expected {len(header)} fields")
        try:
            bus_id, hour, p = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise IngestError(f"series table: line {lineno}: {exc}") from None
        bus = cols.setdefault(bus_id, {})
        if hour in bus:
            raise IngestError(f"series table: line {lineno}: duplicate hour {hour} for bus {bus_id}")
        bus[hour] = p
    out = {}
    for bus_id, by_hour in cols.items():
        n = len(by_hour)
        if sorted(by_hour) != list(range(n)):
            raise IngestError(f"series table: bus {bus_id}: hours must run 0..{n - 1}")
        out[bus_id] = np.array([by_hour[h] for h in range(n)])
    return out


def parse_series_csv(text: str) -> dict[int, HourlySeries]:
    out = {}
    for bus_id, values in parse_series_table(text).items():
        try:
            out[bus_id] = HourlySeries(values, str(bus_id))
        except ValueError as exc:
            raise IngestError(f"series table: bus {bus_id}: {exc}") from None
    return out


# ---------------------------------------------------------------------------
# corpus directory layout

MANIFEST = "manifest.json"
FACILITIES = "facilities.csv"
CURVES = "sector_curves.csv"
UTILITIES = "utilities.csv"
BUSES = "buses.csv"
SOLAR = "solar.csv"


def write_text_atomic(path: str | os.PathLike, text: str) -> None:
    """Write via a temp file in the same directory, then rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def write_corpus(directory: str | os.PathLike, corpus: Corpus) -> None:
    directory = Path(directory)
    entries = []
    for p in corpus.profiles:
        rel = f"profiles/{p.kind}/{p.profile_id}.csv"
        write_text_atomic(directory / rel, format_profile_values(p.series))
        entries.append(manifest_entry(p, rel))
    write_text_atomic(directory / MANIFEST, json.dumps(entries, indent=1) + "\n")
    write_text_atomic(directory / FACILITIES, format_facilities(corpus.facilities))
    write_text_atomic(directory / CURVES, format_sector_curves(corpus.curves))
    write_text_atomic(directory / UTILITIES, format_utilities(corpus.utilities))


def read_corpus(directory: str | os.PathLike) -> Corpus:
    directory = Path(directory)

    def text(name: str) -> str:
        try:
            return (directory / name).read_text()
        except OSError as exc:
            raise IngestError(f"cannot read {directory / name}: {exc.strerror}") from None

    if not (directory / MANIFEST).exists():
        raise IngestError(f"cannot read {directory / MANIFEST}: no such file")
    return Corpus(
        profiles=parse_prototype_corpus(directory / MANIFEST),
        facilities=parse_facilities(text(FACILITIES)),
        curves=parse_sector_curves(text(CURVES)),
        utilities=parse_utilities(text(UTILITIES)),
    )
