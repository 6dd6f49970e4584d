"""Per-bus candidate pools and yearly industrial facility synthesis."""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from .geo import haversine_km
from .ingest import DailySectorCurve, IndustrialFacilityRecord, PrototypeProfile
from .seeding import derive_seed
from .types import HOURS_PER_YEAR, GeoPoint, HourlySeries, LoadBus

log = logging.getLogger(__name__)

N_NEAREST_LOCATIONS = 5
INDUSTRIAL_NOISE_SIGMA = 0.02
DAYS_PER_YEAR = HOURS_PER_YEAR // 24


def _nearest_location_pool(
    bus: LoadBus, profiles: Sequence[PrototypeProfile], k: int
) -> list[PrototypeProfile]:
    by_loc: dict[GeoPoint, list[PrototypeProfile]] = {}
    for p in profiles:
        by_loc.setdefault(p.location, []).append(p)
    ranked = sorted(
        by_loc.items(),
        key=lambda item: (
            haversine_km(bus.location, item[0]),
            min(p.profile_id for p in item[1]),
        ),
    )
    pool = []
    for loc, group in ranked[:k]:
        dist = haversine_km(bus.location, loc)
        pool.extend((dist, p.profile_id, p) for p in group)
    pool.sort(key=lambda t: (t[0], t[1]))
    return [p for _, _, p in pool]


def residential_pool(
    bus: LoadBus, corpus: Sequence[PrototypeProfile], k: int = N_NEAREST_LOCATIONS
) -> list[PrototypeProfile]:
    """Residential profiles at the ``k`` locations nearest the bus."""
    res = [p for p in corpus if p.kind == "residential"]
    if not res:
        raise ValueError("corpus has no residential profiles")
    return _nearest_location_pool(bus, res, k)


def commercial_pool(
    bus: LoadBus, corpus: Sequence[PrototypeProfile], k: int = N_NEAREST_LOCATIONS
) -> list[PrototypeProfile]:
    """Every commercial building type at the ``k`` locations nearest the bus."""
    com = [p for p in corpus if p.kind == "commercial"]
    if not com:
        raise ValueError("corpus has no commercial profiles")
    pool = _nearest_location_pool(bus, com, k)
    all_subtypes = {p.subtype for p in com}
    by_loc: dict[GeoPoint, set[str]] = {}
    for p in pool:
        by_loc.setdefault(p.location, set()).add(p.subtype)
    for loc, subtypes in by_loc.items():
        missing = all_subtypes - subtypes
        if missing:
            log.warning(
                "bus %s: commercial location (%.3f, %.3f) lacks subtypes %s",
                bus.bus_id, loc.latitude, loc.longitude, sorted(missing),
            )
    return pool


def industrial_pool(
    target_peak_mw: float, facility_profiles: Sequence[PrototypeProfile]
) -> list[PrototypeProfile]:
    """Facilities whose yearly peak is below the industrial component peak.

    When none qualify but the target is positive, the single smallest
    facility is returned so the component can still be built.
    """
    if target_peak_mw < 0:
        raise ValueError("industrial target peak must be >= 0")
    if target_peak_mw == 0:
        return []
    if not facility_profiles:
        raise ValueError("no industrial profiles available for a positive industrial target")
    pool = [p for p in facility_profiles if p.series.max() < target_peak_mw]
    if not pool:
        return [min(facility_profiles, key=lambda p: (p.series.max(), p.profile_id))]
    return pool


def operating_days(annual_operating_hours: float) -> int:
    days = int(np.floor(annual_operating_hours / 24.0 + 0.5))
    return min(max(days, 1), DAYS_PER_YEAR)


def synthesize_industrial_year(
    rec: IndustrialFacilityRecord,
    curve: DailySectorCurve,
    seed: int,
    noise_sigma: float = INDUSTRIAL_NOISE_SIGMA,
) -> PrototypeProfile:
    """Expand a per-unit daily sector curve into one facility's year.

    The daily curve is repeated over a run of consecutive operating days
    starting at a random day (wrapping past Dec 31); idle days sit at the
    curve's minimum.  After multiplicative noise the year is scaled so its
    hourly sum equals the facility's annual energy.
    """
    if rec.sector_code != curve.sector_code:
        raise ValueError(
            f"facility {rec.facility_id} is sector {rec.sector_code}, curve is {curve.sector_code}"
        )
    if not rec.annual_energy_mwh > 0:
        raise ValueError(f"facility {rec.facility_id}: annual energy must be positive")
    rng = np.random.default_rng(seed)
    n_op = operating_days(rec.annual_operating_hours)
    start = int(rng.integers(0, DAYS_PER_YEAR))

    daily = np.asarray(curve.per_unit_values)
    standby = np.full(24, daily.min())
    active = np.zeros(DAYS_PER_YEAR, dtype=bool)
    active[(start + np.arange(n_op)) % DAYS_PER_YEAR] = True
    year = np.where(active[:, None], daily[None, :], standby[None, :]).ravel()

    year = np.maximum(0.0, year * (1.0 + rng.normal(0.0, noise_sigma, HOURS_PER_YEAR)))
    total = year.sum()
    if total <= 0:
        raise ValueError(f"facility {rec.facility_id}: synthesized year has no energy")
    year *= rec.annual_energy_mwh / total
    return PrototypeProfile(
        profile_id=rec.facility_id,
        kind="industrial",
        subtype=rec.sector_code,
        location=None,
        region="",
        series=HourlySeries(year, rec.facility_id),
    )


def synthesize_facilities(
    facilities: Sequence[IndustrialFacilityRecord],
    curves: Sequence[DailySectorCurve],
    master_seed: int,
) -> list[PrototypeProfile]:
    """Yearly profiles for every facility whose sector has a daily curve."""
    by_code = {c.sector_code: c for c in curves}
    out = []
    for rec in facilities:
        curve = by_code.get(rec.sector_code)
        if curve is None:
            log.warning("facility %s: no daily curve for sector %s, skipped",
                        rec.facility_id, rec.sector_code)
            continue
        seed = derive_seed(master_seed, "facility", rec.facility_id)
        out.append(synthesize_industrial_year(rec, curve, seed))
    return out
