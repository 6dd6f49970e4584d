"""Behind-the-meter solar "duck curve" scenario on top of benchmark bus series."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

import numpy as np

from .geo import haversine_km
from .ingest import IngestError, _csv_text, _rows, fmt
from .seeding import substream
from .types import CompositionRatio, GeoPoint, HourlySeries, LoadBus

SOLAR_HEADER = ["lat", "lon", "avg_output"]
ALLOCATION_HEADER = ["bus_id", "btm_capacity_mw"]
SYSTEM_HEADER = ["hour", "benchmark_mw", "net_mw"]

START_HOURS = (6, 7, 8)
PEAK_HOURS = (13, 14, 15)
END_HOURS = (18, 19, 20)


@dataclass(frozen=True)
class SolarResourceRecord:
    location: GeoPoint
    avg_output: float  # kWh/m^2/day

    def __post_init__(self) -> None:
        if not self.avg_output >= 0:
            raise ValueError(f"solar output must be >= 0, got {self.avg_output}")


@dataclass(frozen=True)
class DuckCurveConfig:
    system_btm_capacity_mw: float = 30_000.0
    x1: float = 0.5
    x2: float = 0.5
    day_index: int = 140  # May 21
    seed: int = 0

    def __post_init__(self) -> None:
        if self.system_btm_capacity_mw < 0:
            raise ValueError("system BTM capacity must be >= 0")
        if self.x1 < 0 or self.x2 < 0 or abs(self.x1 + self.x2 - 1.0) > 1e-9:
            raise ValueError("weights x1, x2 must be >= 0 and sum to 1")
        if not 0 <= self.day_index <= 364:
            raise ValueError("day_index must lie in [0, 364]")

    @classmethod
    def from_json(cls, text: str) -> DuckCurveConfig:
        data = json.loads(text)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown scenario config keys: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1) + "\n"


@dataclass(frozen=True, eq=False)
class BTMProfile:
    values: np.ndarray  # 24 hourly MW
    start: int
    peak: int
    end: int


@dataclass
class DuckCurveResult:
    capacities: dict[int, float]
    profiles: dict[int, BTMProfile]
    benchmark: dict[int, np.ndarray]
    net: dict[int, np.ndarray]
    system_benchmark: np.ndarray
    system_net: np.ndarray


def btm_potential(
    load: float, max_load: float, solar: float, max_solar: float, x1: float, x2: float
) -> float:
    """Weighted sum of a bus's load size and solar resource, each relative to the system max."""
    if max_load <= 0 or max_solar <= 0:
        raise ValueError("maximum load size and solar resource must be positive")
    return x1 * (load / max_load) + x2 * (solar / max_solar)


def allocate_btm_capacity(potentials: Sequence[float], system_capacity: float) -> np.ndarray:
    pot = np.asarray(potentials, dtype=np.float64)
    total = pot.sum()
    if not total > 0:
        raise ValueError("BTM potentials sum to zero; nothing to allocate against")
    return system_capacity * pot / total


def btm_profile_from_anchors(capacity: float, start: int, peak: int, end: int) -> BTMProfile:
    """Piecewise-linear day: 0 at ``start``, ``capacity`` at ``peak``, 0 at ``end``."""
    if not 0 <= start < peak < end <= 23:
        raise ValueError(f"need 0 <= start < peak < end <= 23, got {start}, {peak}, {end}")
    h = np.arange(24, dtype=np.float64)
    up = (h - start) / (peak - start)
    down = (end - h) / (end - peak)
    shape = np.where(h <= peak, up, down)
    shape[(h < start) | (h > end)] = 0.0
    values = capacity * shape
    values[peak] = capacity
    return BTMProfile(values, start, peak, end)


def btm_solar_profile(capacity: float, rng: np.random.Generator) -> BTMProfile:
    """Random start (6-8 am), peak (1-3 pm) and end (6-8 pm) hours, linear ramps between."""
    if capacity < 0:
        raise ValueError("BTM capacity must be >= 0")
    start = START_HOURS[int(rng.integers(len(START_HOURS)))]
    peak = PEAK_HOURS[int(rng.integers(len(PEAK_HOURS)))]
    end = END_HOURS[int(rng.integers(len(END_HOURS)))]
    return btm_profile_from_anchors(capacity, start, peak, end)


def nearest_solar(loc: GeoPoint, resources: Sequence[SolarResourceRecord]) -> float:
    if not resources:
        raise ValueError("no solar resource records")
    best = min(range(len(resources)), key=lambda i: (haversine_km(loc, resources[i].location), i))
    return resources[best].avg_output


def apply_duck_curve(
    benchmark: Mapping[int, HourlySeries],
    buses: Sequence[LoadBus],
    ratios: Mapping[int, CompositionRatio],
    solar: Sequence[SolarResourceRecord],
    config: DuckCurveConfig,
) -> DuckCurveResult:
    """Subtract a BTM solar day from each bus's benchmark day.

    Only residential + commercial load counts toward a bus's solar
    potential.  Net load is floored at zero.
    """
    ordered = sorted(buses, key=lambda b: b.bus_id)
    missing = [b.bus_id for b in ordered if b.bus_id not in benchmark or b.bus_id not in ratios]
    if missing:
        raise ValueError(f"buses without benchmark series or composition: {missing[:10]}")
    loads = np.array(
        [b.peak_mw * (ratios[b.bus_id].residential + ratios[b.bus_id].commercial) for b in ordered]
    )
    resources = np.array([nearest_solar(b.location, solar) for b in ordered])
    max_load, max_solar = loads.max(initial=0.0), resources.max(initial=0.0)
    potentials = [
        btm_potential(ld, max_load, sr, max_solar, config.x1, config.x2)
        for ld, sr in zip(loads, resources)
    ]
    caps = allocate_btm_capacity(potentials, config.system_btm_capacity_mw)

    hours = slice(config.day_index * 24, config.day_index * 24 + 24)
    result = DuckCurveResult({}, {}, {}, {}, np.zeros(24), np.zeros(24))
    for bus, cap in zip(ordered, caps):
        profile = btm_solar_profile(float(cap), substream(config.seed, "btm", bus.bus_id))
        day = benchmark[bus.bus_id].values[hours].copy()
        net = np.maximum(day - profile.values, 0.0)
        result.capacities[bus.bus_id] = float(cap)
        result.profiles[bus.bus_id] = profile
        result.benchmark[bus.bus_id] = day
        result.net[bus.bus_id] = net
        result.system_benchmark += day
        result.system_net += net
    return result


# ---------------------------------------------------------------------------
# file formats


def parse_solar_csv(text: str) -> list[SolarResourceRecord]:
    out = []
    for lineno, (lat, lon, val) in _rows(text, SOLAR_HEADER, "solar resource table"):
        try:
            out.append(SolarResourceRecord(GeoPoint(float(lat), float(lon)), float(val)))
        except ValueError as exc:
            raise IngestError(f"solar resource table: line {lineno}: {exc}") from None
    return out


def format_solar_csv(records: Sequence[SolarResourceRecord]) -> str:
    return _csv_text(
        SOLAR_HEADER,
        ([fmt(r.location.latitude), fmt(r.location.longitude), fmt(r.avg_output)] for r in records),
    )


def format_allocation_csv(capacities: Mapping[int, float]) -> str:
    return _csv_text(ALLOCATION_HEADER, ([b, fmt(capacities[b])] for b in sorted(capacities)))


def parse_allocation_csv(text: str) -> dict[int, float]:
    out = {}
    for lineno, (bid, cap) in _rows(text, ALLOCATION_HEADER, "allocation table"):
        try:
            out[int(bid)] = float(cap)
        except ValueError as exc:
            raise IngestError(f"allocation table: line {lineno}: {exc}") from None
    return out


def format_system_csv(benchmark: np.ndarray, net: np.ndarray) -> str:
    return _csv_text(
        SYSTEM_HEADER, ([h, fmt(b), fmt(n)] for h, (b, n) in enumerate(zip(benchmark, net)))
    )


def parse_system_csv(text: str) -> tuple[np.ndarray, np.ndarray]:
    bench, net = [], []
    for lineno, (h, b, n) in _rows(text, SYSTEM_HEADER, "system net-load table"):
        try:
            if int(h) != len(bench):
                raise ValueError(f"expected hour {len(bench)}, got {h}")
            bench.append(float(b))
            net.append(float(n))
        except ValueError as exc:
            raise IngestError(f"system net-load table: line {lineno}: {exc}") from None
    return np.array(bench), np.array(net)
