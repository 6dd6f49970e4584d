"""Bus-to-utility assignment and residential/commercial/industrial mix."""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Sequence

from .geo import haversine_km
from .ingest import UtilitySalesRecord
from .types import CompositionRatio, LoadBus, LoadType

# Order doubles as the tie-break priority for dominance.
LOAD_TYPES = (LoadType.RESIDENTIAL, LoadType.COMMERCIAL, LoadType.INDUSTRIAL)


def assign_utility(bus: LoadBus, utilities: Sequence[UtilitySalesRecord]) -> str:
    """Id of the utility whose centroid is nearest the bus.

    Equal distances resolve to the lexicographically smallest utility id.
    """
    if not utilities:
        raise ValueError("cannot assign a utility from an empty utility list")
    best = min(utilities, key=lambda u: (haversine_km(bus.location, u.centroid), u.utility_id))
    return best.utility_id


def composition_ratio(u: UtilitySalesRecord) -> CompositionRatio:
    total = sum(u.sales_mwh)
    if total <= 0:
        raise ValueError(f"utility {u.utility_id}: total sales must be positive")
    return CompositionRatio(*(v / total for v in u.sales_mwh))


def dominant_type(r: CompositionRatio) -> LoadType:
    values = r.as_tuple()
    best = max(values)
    return LOAD_TYPES[values.index(best)]


def dominant_type_census(ratios: Iterable[CompositionRatio]) -> dict[str, float]:
    """Percentage of buses dominated by each load type."""
    counts = Counter(dominant_type(r) for r in ratios)
    n = sum(counts.values())
    if n == 0:
        raise ValueError("dominance census needs at least one bus")
    return {t.value: 100.0 * counts.get(t, 0) / n for t in LOAD_TYPES}


def bus_compositions(
    buses: Sequence[LoadBus], utilities: Sequence[UtilitySalesRecord]
) -> dict[int, tuple[str, CompositionRatio]]:
    """Utility id and composition ratio for every bus, keyed by bus id."""
    by_id = {u.utility_id: u for u in utilities}
    ratios = {uid: composition_ratio(u) for uid, u in by_id.items()}
    out = {}
    for bus in buses:
        uid = assign_utility(bus, utilities)
        out[bus.bus_id] = (uid, ratios[uid])
    return out
