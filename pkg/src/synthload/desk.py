"""Deterministic stand-in corpus for when the real datasets are absent.

The generated profiles imitate the qualitative features of the public
building/facility/feeder data: residential days with a morning and an
evening peak in winter and a single afternoon peak in summer, commercial
building types with their own opening hours and weekend behaviour, flat
24-hour industrial sector curves.  Magnitudes are "block equivalents" (a few
MW per prototype rather than a few kW per building) so a desk machine can
aggregate GW-sized buses in seconds.

Calendar: hour 0 is Monday Jan 1, non-leap year.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ingest import (
    Corpus,
    DailySectorCurve,
    IndustrialFacilityRecord,
    PrototypeProfile,
    UtilitySalesRecord,
)
from .types import HOURS_PER_YEAR, GeoPoint, HourlySeries, LoadBus

DAYS = HOURS_PER_YEAR // 24
HOURS = np.arange(24, dtype=np.float64)

# Rough continental-US box.
LAT_RANGE = (27.0, 48.0)
LON_RANGE = (-122.0, -72.0)

DEFAULT_REGIONS = ("west", "central", "east")


@dataclass(frozen=True)
class CommercialType:
    name: str
    scale_mw: float
    base: float
    open_hour: float
    close_hour: float
    weekend: float
    peaks: tuple[tuple[float, float, float], ...] = ()


# The 16 commercial reference building types.
COMMERCIAL_TYPES = (
    CommercialType("FullServiceRestaurant", 1.5, 0.30, 10, 22, 1.00, ((12, 0.35, 1.2), (19, 0.45, 1.5))),
    CommercialType("Hospital", 8.0, 0.70, 7, 19, 0.95),
    CommercialType("LargeHotel", 5.0, 0.55, 6, 23, 1.00, ((7, 0.20, 1.5), (20, 0.25, 2.0))),
    CommercialType("LargeOffice", 10.0, 0.30, 7, 19, 0.25),
    CommercialType("MediumOffice", 4.0, 0.25, 7, 19, 0.20),
    CommercialType("MidriseApartment", 3.0, 0.40, 6, 23, 1.05, ((7, 0.25, 1.5), (19, 0.35, 2.0))),
    CommercialType("OutPatient", 3.0, 0.35, 7, 19, 0.35),
    CommercialType("PrimarySchool", 3.0, 0.20, 7, 16, 0.15),
    CommercialType("QuickServiceRestaurant", 1.0, 0.35, 6, 23, 1.00, ((12, 0.40, 1.2), (18, 0.30, 1.5))),
    CommercialType("SecondarySchool", 5.0, 0.20, 7, 17, 0.15),
    CommercialType("SmallHotel", 1.5, 0.50, 6, 23, 1.00, ((7, 0.20, 1.5), (20, 0.25, 2.0))),
    CommercialType("SmallOffice", 1.0, 0.20, 8, 18, 0.15),
    CommercialType("StandaloneRetail", 1.5, 0.25, 9, 21, 0.90),
    CommercialType("StripMall", 2.0, 0.25, 9, 21, 1.00, ((17, 0.20, 2.5),)),
    CommercialType("SuperMarket", 2.5, 0.55, 6, 23, 1.00),
    CommercialType("Warehouse", 2.5, 0.30, 6, 17, 0.40),
)

# (SIC code, overnight level, shift start, shift end) for daily per-unit curves.
INDUSTRIAL_SECTORS = (
    ("2011", 0.55, 6, 22),   # meat packing
    ("2086", 0.60, 7, 19),   # bottled beverages
    ("2621", 0.92, 0, 24),   # paper mills
    ("2821", 0.88, 0, 24),   # plastics materials
    ("2911", 0.95, 0, 24),   # petroleum refining
    ("3312", 0.75, 6, 22),   # steel works
    ("3674", 0.90, 8, 20),   # semiconductors
    ("3711", 0.35, 6, 23),   # motor vehicles
)


def _circ_gauss(center: float, width: float) -> np.ndarray:
    d = np.abs(HOURS - center)
    d = np.minimum(d, 24.0 - d)
    return np.exp(-0.5 * (d / width) ** 2)


def _season_phase(day: int | np.ndarray) -> np.ndarray:
    """cos of the annual cycle: +1 mid-January, -1 mid-July."""
    return np.cos(2 * np.pi * (np.asarray(day, dtype=np.float64) - 15.0) / DAYS)


def _summer_mix(day: int | np.ndarray) -> np.ndarray:
    # 0 from early Nov to late Mar, 1 from early May to late Sep.
    return np.clip(0.5 - 1.5 * _season_phase(day), 0.0, 1.0)


def _coldness(loc: GeoPoint) -> float:
    return float(np.clip((loc.latitude - LAT_RANGE[0]) / (LAT_RANGE[1] - LAT_RANGE[0]), 0, 1))


TWO_PEAK = _circ_gauss(7, 1.6) + 1.15 * _circ_gauss(19, 2.2)
ONE_PEAK = _circ_gauss(16, 3.2)


def _residential_days(days: np.ndarray, coldness: float) -> np.ndarray:
    phase = _season_phase(days)[:, None]
    heat = np.clip(phase, 0.0, None) * (0.1 + 0.6 * coldness)
    cool = np.clip(-phase, 0.0, None) * (0.2 + 0.8 * (1.0 - coldness))
    s = _summer_mix(days)[:, None]
    occ = 0.35
    return 0.35 + (1 - s) * (occ + heat) * TWO_PEAK + s * (occ + cool) * ONE_PEAK


def residential_day_template(day: int, coldness: float) -> np.ndarray:
    """Noise-free 24-hour residential shape for ``day`` (0 = Jan 1).

    Winter days carry heating on a morning+evening double peak; summer days
    carry cooling on a single afternoon peak.
    """
    return _residential_days(np.array([day]), coldness)[0]


def residential_year_template(coldness: float) -> np.ndarray:
    year = _residential_days(np.arange(DAYS), coldness).ravel()
    return year / year.max()


def _plateau(open_hour: float, close_hour: float) -> np.ndarray:
    rise = 1.0 / (1.0 + np.exp(-(HOURS - open_hour) / 0.7))
    fall = 1.0 / (1.0 + np.exp(-(close_hour - HOURS) / 0.7))
    return rise * fall


def commercial_year_template(ctype: CommercialType, coldness: float) -> np.ndarray:
    occupied = _plateau(ctype.open_hour, ctype.close_hour)
    for center, amp, width in ctype.peaks:
        occupied = occupied + amp * _circ_gauss(center, width)
    days = np.arange(DAYS)
    weekend = (days % 7) >= 5
    activity = np.where(weekend, ctype.weekend, 1.0)
    phase = _season_phase(days)
    seasonal = (
        1.0
        + (0.10 + 0.15 * (1 - coldness)) * np.clip(-phase, 0, None)
        + 0.04 * coldness * np.clip(phase, 0, None)
    )
    year = (ctype.base + (1 - ctype.base) * activity[:, None] * occupied[None, :]) * seasonal[:, None]
    year = year.ravel()
    return year / year.max()


def sector_curve(code: str, overnight: float, start: float, end: float) -> DailySectorCurve:
    shape = overnight + (1 - overnight) * _plateau(start, end)
    return DailySectorCurve(code, shape / shape.max())


def _noisy(template: np.ndarray, scale: float, sigma: float, rng: np.random.Generator) -> np.ndarray:
    return np.maximum(0.0, scale * template * (1.0 + rng.normal(0.0, sigma, template.size)))


def _random_locations(rng: np.random.Generator, n: int) -> list[GeoPoint]:
    lats = rng.uniform(*LAT_RANGE, size=n)
    lons = rng.uniform(*LON_RANGE, size=n)
    return [GeoPoint(round(float(a), 4), round(float(o), 4)) for a, o in zip(lats, lons)]


def _assign_regions(locations: Sequence[GeoPoint], tags: Sequence[str]) -> list[str]:
    """Split locations into contiguous longitude bands, one per tag (west to east)."""
    order = np.argsort([loc.longitude for loc in locations], kind="stable")
    regions = [""] * len(locations)
    for tag, chunk in zip(tags, np.array_split(order, len(tags))):
        for i in chunk:
            regions[int(i)] = tag
    return regions


def generate_desk_corpus(
    seed: int,
    n_locations: int,
    region_tags: Sequence[str] = DEFAULT_REGIONS,
    feeders_per_region: int = 60,
    n_facilities: int = 60,
    n_utilities: int | None = None,
) -> Corpus:
    """Build a full synthetic corpus; identical for identical arguments.

    Per location: one residential profile and one profile for each of the 16
    commercial types.  Per region: ``feeders_per_region`` feeder profiles.
    Plus industrial facility records, their sector daily curves and utility
    sales records.
    """
    if n_locations < 1:
        raise ValueError("n_locations must be >= 1")
    if not region_tags:
        raise ValueError("need at least one region tag")
    rng = np.random.default_rng(seed)
    locations = _random_locations(rng, n_locations)
    regions = _assign_regions(locations, region_tags)

    profiles: list[PrototypeProfile] = []
    for i, (loc, region) in enumerate(zip(locations, regions)):
        cold = _coldness(loc)
        pid = f"res_{i:03d}"
        values = _noisy(residential_year_template(cold), rng.uniform(3.0, 6.0), 0.04, rng)
        profiles.append(
            PrototypeProfile(pid, "residential", "residential", loc, region, HourlySeries(values, pid))
        )
        for ctype in COMMERCIAL_TYPES:
            pid = f"com_{i:03d}_{ctype.name}"
            scale = ctype.scale_mw * rng.uniform(0.8, 1.2)
            values = _noisy(commercial_year_template(ctype, cold), scale, 0.04, rng)
            profiles.append(
                PrototypeProfile(pid, "commercial", ctype.name, loc, region, HourlySeries(values, pid))
            )

    for tag in region_tags:
        members = [loc for loc, r in zip(locations, regions) if r == tag]
        if not members:
            continue
        for j in range(feeders_per_region):
            anchor = members[int(rng.integers(len(members)))]
            loc = GeoPoint(
                round(float(np.clip(anchor.latitude + rng.uniform(-0.5, 0.5), -90, 90)), 4),
                round(float(np.clip(anchor.longitude + rng.uniform(-0.5, 0.5), -180, 180)), 4),
            )
            cold = _coldness(loc)
            res_share = rng.uniform(0.3, 0.7)
            office = COMMERCIAL_TYPES[int(rng.integers(len(COMMERCIAL_TYPES)))]
            shape = (
                res_share * residential_year_template(cold)
                + (1 - res_share) * commercial_year_template(office, cold)
                + rng.uniform(0.4, 0.9)  # flat industrial / street-lighting base
            )
            shape /= shape.max()
            pid = f"feeder_{tag}_{j:03d}"
            values = _noisy(shape, rng.uniform(8.0, 40.0), 0.03, rng)
            profiles.append(PrototypeProfile(pid, "feeder", "taxonomy", loc, tag, HourlySeries(values, pid)))

    curves = [sector_curve(*s) for s in INDUSTRIAL_SECTORS]
    facilities = []
    for k in range(n_facilities):
        code = INDUSTRIAL_SECTORS[int(rng.integers(len(INDUSTRIAL_SECTORS)))][0]
        energy = float(np.round(rng.lognormal(np.log(40_000.0), 0.9), 3))
        hours = float(np.round(rng.uniform(3000.0, 8760.0), 1))
        facilities.append(IndustrialFacilityRecord(f"fac_{k:04d}", code, energy, hours))

    n_util = n_utilities if n_utilities is not None else max(3, 2 * n_locations)
    utilities = []
    for u, loc in enumerate(_random_locations(rng, n_util)):
        shares = rng.dirichlet((5.0, 3.0, 2.0))
        total = rng.lognormal(np.log(5e6), 0.7)
        sales = tuple(float(np.round(v, 3)) for v in shares * total)
        utilities.append(UtilitySalesRecord(f"U{u:03d}", loc, sales))

    return Corpus(profiles=profiles, facilities=facilities, curves=curves, utilities=utilities)


def generate_desk_buses(
    seed: int,
    n_buses: int,
    total_peak_mw: float = 100_000.0,
) -> list[LoadBus]:
    """Random bus table whose peaks sum to ``total_peak_mw``."""
    if n_buses < 1:
        raise ValueError("n_buses must be >= 1")
    rng = np.random.default_rng([seed, 1])
    locations = _random_locations(rng, n_buses)
    raw = rng.lognormal(0.0, 0.6, n_buses)
    peaks = np.round(raw / raw.sum() * total_peak_mw, 3)
    pfs = np.round(rng.uniform(0.92, 0.99, n_buses), 3)
    return [
        LoadBus(i + 1, loc, float(p), float(pf))
        for i, (loc, p, pf) in enumerate(zip(locations, peaks, pfs))
    ]


def generate_desk_solar(seed: int, n_sites: int = 40) -> list[tuple[GeoPoint, float]]:
    """(location, kWh/m^2/day) pairs, sunnier toward the south-west."""
    rng = np.random.default_rng([seed, 2])
    out = []
    for loc in _random_locations(rng, n_sites):
        south = 1.0 - _coldness(loc)
        west = (LON_RANGE[1] - loc.longitude) / (LON_RANGE[1] - LON_RANGE[0])
        out.append((loc, round(3.5 + 2.0 * south + 1.0 * west + rng.normal(0, 0.15), 3)))
    return out
