"""Bus-level load synthesis by iterative aggregation of prototype profiles.

For each load type the bus's component peak (bus peak times composition
share) is the stopping target.  Each iteration draws one prototype, with
lower-average profiles favoured, diversifies it (integer time shift, swapped
hour pairs, multiplicative white noise) and adds it to the component.  The
summed components then get a constant offset that moves their load factor to
that of a same-region feeder aggregate, and a final multiplicative rescale
puts the peak exactly on the bus size.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .geo import haversine_km
from .ingest import Corpus, PrototypeProfile
from .prototypes import (
    commercial_pool,
    industrial_pool,
    residential_pool,
    synthesize_facilities,
)
from .seeding import substream
from .types import (
    HOURS_PER_YEAR,
    CompositionRatio,
    HourlySeries,
    LoadBus,
    LoadType,
    _load_factor,
)

log = logging.getLogger(__name__)

COMPONENTS = (LoadType.RESIDENTIAL, LoadType.COMMERCIAL, LoadType.INDUSTRIAL)


def _default_sigma_shift() -> dict[str, float]:
    return {"residential": 0.4, "commercial": 0.3, "industrial": 0.1}


def _default_pairs() -> dict[str, int]:
    return {"residential": 100, "commercial": 100, "industrial": 50}


@dataclass(frozen=True)
class AggregationConfig:
    sigma_shift: Mapping[str, float] = field(default_factory=_default_sigma_shift)
    permutation_pairs: Mapping[str, int] = field(default_factory=_default_pairs)
    noise_sigma_frac: float = 0.02
    master_seed: int = 0
    # Guards against a pool that can never reach its target.
    max_iterations: int = 1_000_000

    def __post_init__(self) -> None:
        for t in COMPONENTS:
            if not self.sigma_shift[t.value] > 0:
                raise ValueError(f"time-shift sigma for {t.value} must be positive")
            if self.permutation_pairs[t.value] < 0:
                raise ValueError(f"permutation pair count for {t.value} must be >= 0")
        if self.noise_sigma_frac < 0:
            raise ValueError("noise sigma must be >= 0")


@dataclass(frozen=True)
class BusSynthesisResult:
    bus_id: int
    series: HourlySeries
    component_series: tuple[HourlySeries, HourlySeries, HourlySeries]
    reference_load_factor: float
    lf_constant: float
    final_scale: float
    iterations: tuple[int, int, int] = (0, 0, 0)

    @property
    def clamped(self) -> bool:
        return self.lf_constant == 0.0


# ---------------------------------------------------------------------------
# stochastic building blocks


def selection_weights(means: Sequence[float]) -> np.ndarray:
    """Pick probabilities proportional to ``1 / sqrt(mean)``."""
    m = np.asarray(means, dtype=np.float64)
    if m.size == 0:
        raise ValueError("selection needs at least one profile")
    if np.any(~(m > 0)):
        raise ValueError("profile means must be positive for weighted selection")
    w = 1.0 / np.sqrt(m)
    return w / w.sum()


def pick_index(cdf: np.ndarray, rng: np.random.Generator) -> int:
    """Draw an index from a cumulative distribution (last entry 1)."""
    return int(np.searchsorted(cdf, rng.random(), side="right"))


def selection_cdf(probabilities: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(probabilities)
    cdf[-1] = 1.0
    return cdf


def sample_time_shift(sigma: float, rng: np.random.Generator) -> int:
    """Integer shift x with P(x) = mass of N(0, sigma^2) on [x - 1/2, x + 1/2)."""
    if sigma < 0:
        raise ValueError("time-shift sigma must be >= 0")
    return int(np.floor(rng.normal(0.0, sigma) + 0.5))


def _permute_inplace(values: np.ndarray, n_pairs: int, rng: np.random.Generator) -> None:
    if n_pairs < 0:
        raise ValueError("number of hour pairs must be >= 0")
    if 2 * n_pairs > values.size:
        raise ValueError(f"cannot draw {n_pairs} disjoint hour pairs from {values.size} hours")
    if n_pairs == 0:
        return
    idx = rng.choice(values.size, size=2 * n_pairs, replace=False)
    a, b = idx[:n_pairs], idx[n_pairs:]
    values[a], values[b] = values[b], values[a]


def permute_hour_pairs(s: HourlySeries, n_pairs: int, rng: np.random.Generator) -> HourlySeries:
    """Swap the values of ``n_pairs`` disjoint, uniformly drawn hour pairs."""
    values = s.values.copy()
    _permute_inplace(values, n_pairs, rng)
    return HourlySeries(values, s.label)


def _noise_inplace(values: np.ndarray, sigma_frac: float, rng: np.random.Generator) -> None:
    if sigma_frac < 0:
        raise ValueError("noise sigma must be >= 0")
    if sigma_frac == 0:
        return
    values *= 1.0 + rng.normal(0.0, sigma_frac, values.size)
    np.maximum(values, 0.0, out=values)


def add_noise(s: HourlySeries, sigma_frac: float, rng: np.random.Generator) -> HourlySeries:
    """Multiplicative white Gaussian noise, clamped at zero."""
    values = s.values.copy()
    _noise_inplace(values, sigma_frac, rng)
    return HourlySeries(values, s.label)


# ---------------------------------------------------------------------------
# component aggregation


def _aggregate(
    target_peak: float,
    pool: Sequence[PrototypeProfile],
    kind: LoadType | str,
    config: AggregationConfig,
    rng: np.random.Generator,
) -> tuple[np.ndarray, int]:
    kind = LoadType(kind)
    acc = np.zeros(HOURS_PER_YEAR)
    if target_peak < 0:
        raise ValueError("component target peak must be >= 0")
    if target_peak == 0:
        return acc, 0
    if not pool:
        raise ValueError(f"empty {kind.value} pool for a positive target of {target_peak} MW")
    sources = [p.series.values for p in pool]
    cdf = selection_cdf(selection_weights([float(v.mean()) for v in sources]))
    sigma = config.sigma_shift[kind.value]
    n_pairs = config.permutation_pairs[kind.value]

    for n in range(1, config.max_iterations + 1):
        picked = sources[pick_index(cdf, rng)]
        shifted = np.roll(picked, sample_time_shift(sigma, rng))
        _permute_inplace(shifted, n_pairs, rng)
        _noise_inplace(shifted, config.noise_sigma_frac, rng)
        acc += shifted
        if acc.max() >= target_peak:
            return acc, n
    raise RuntimeError(
        f"{kind.value} component did not reach {target_peak} MW in {config.max_iterations} draws"
    )


def aggregate_component(
    target_peak: float,
    pool: Sequence[PrototypeProfile],
    kind: LoadType | str,
    config: AggregationConfig,
    rng: np.random.Generator,
) -> HourlySeries:
    """Accumulate transformed prototypes until the running peak reaches ``target_peak``."""
    acc, _ = _aggregate(target_peak, pool, kind, config, rng)
    return HourlySeries(acc, LoadType(kind).value)


# ---------------------------------------------------------------------------
# load-factor correction


def feeder_reference_lf(
    bus: LoadBus, feeders: Sequence[PrototypeProfile], rng: np.random.Generator
) -> float:
    """Load factor of a random same-region feeder subset sized to the bus.

    Feeders are drawn without replacement until their summed peaks reach
    the bus peak, or the region runs out.
    """
    if not feeders:
        raise ValueError(f"bus {bus.bus_id}: no feeder profiles in its region")
    total = np.zeros(HOURS_PER_YEAR)
    peak_sum = 0.0
    for i in rng.permutation(len(feeders)):
        series = feeders[i].series
        total += series.values
        peak_sum += series.max()
        if peak_sum >= bus.peak_mw:
            break
    return _load_factor(total)


def lf_constant(avg: float, max_: float, reference_lf: float) -> float:
    """Constant C with (C + avg) / (C + max) == reference_lf, floored at 0.

    A negative C (reference below the current load factor) would push the
    lowest hours toward negative load, so it is clamped to 0.
    """
    if not 0 < reference_lf < 1:
        raise ValueError(f"reference load factor must lie in (0, 1), got {reference_lf}")
    if not 0 < avg <= max_:
        raise ValueError(f"need 0 < average <= max, got average {avg}, max {max_}")
    c = (reference_lf * max_ - avg) / (1.0 - reference_lf)
    return max(c, 0.0)


# ---------------------------------------------------------------------------
# per-bus and system synthesis


def bus_rng(master_seed: int, bus_id: int) -> np.random.Generator:
    return substream(master_seed, "bus", bus_id)


def component_targets(bus: LoadBus, ratio: CompositionRatio) -> dict[LoadType, float]:
    return {t: bus.peak_mw * ratio[t] for t in COMPONENTS}


def bus_pools(
    bus: LoadBus,
    ratio: CompositionRatio,
    profiles: Sequence[PrototypeProfile],
    facility_profiles: Sequence[PrototypeProfile],
) -> dict[LoadType, list[PrototypeProfile]]:
    """Candidate pools for the components with a positive target."""
    targets = component_targets(bus, ratio)
    pools: dict[LoadType, list[PrototypeProfile]] = {t: [] for t in COMPONENTS}
    if targets[LoadType.RESIDENTIAL] > 0:
        pools[LoadType.RESIDENTIAL] = residential_pool(bus, profiles)
    if targets[LoadType.COMMERCIAL] > 0:
        pools[LoadType.COMMERCIAL] = commercial_pool(bus, profiles)
    pools[LoadType.INDUSTRIAL] = industrial_pool(targets[LoadType.INDUSTRIAL], facility_profiles)
    return pools


def build_bus_series(
    bus: LoadBus,
    ratio: CompositionRatio,
    pools: Mapping[LoadType, Sequence[PrototypeProfile]],
    config: AggregationConfig,
    feeders: Sequence[PrototypeProfile],
) -> BusSynthesisResult:
    rng = bus_rng(config.master_seed, bus.bus_id)
    targets = component_targets(bus, ratio)
    parts = []
    counts = []
    for t in COMPONENTS:
        acc, n = _aggregate(targets[t], pools.get(t, []), t, config, rng)
        parts.append(acc)
        counts.append(n)
    total = parts[0] + parts[1] + parts[2]
    mx = float(total.max())
    if mx <= 0:
        raise ValueError(f"bus {bus.bus_id}: aggregated load is zero")
    avg = float(total.mean())

    ref = feeder_reference_lf(bus, feeders, rng)
    c = lf_constant(avg, mx, ref)
    scale = bus.peak_mw / (mx + c)
    final = (total + c) * scale
    label = str(bus.bus_id)
    return BusSynthesisResult(
        bus_id=bus.bus_id,
        series=HourlySeries(final, label),
        component_series=tuple(
            HourlySeries(p, f"{label}:{t.value}") for p, t in zip(parts, COMPONENTS)
        ),
        reference_load_factor=ref,
        lf_constant=c,
        final_scale=scale,
        iterations=tuple(counts),
    )


def bus_region(bus: LoadBus, feeders: Sequence[PrototypeProfile]) -> str:
    """Region tag of the feeder nearest the bus."""
    if not feeders:
        raise ValueError("no feeder profiles to determine a bus region")
    nearest = min(feeders, key=lambda f: (haversine_km(bus.location, f.location), f.profile_id))
    return nearest.region


def synthesize_system(
    buses: Sequence[LoadBus],
    ratios: Mapping[int, CompositionRatio],
    corpus: Corpus,
    config: AggregationConfig,
    workers: int = 1,
) -> list[BusSynthesisResult]:
    """Synthesize every bus; results come back in bus_id order.

    Each bus draws from its own seeded substream, so the output does not
    depend on ``workers``.
    """
    facility_profiles = synthesize_facilities(corpus.facilities, corpus.curves, config.master_seed)
    profiles = [p for p in corpus.profiles if p.kind in ("residential", "commercial")]
    feeders = corpus.of_kind("feeder")
    by_region: dict[str, list[PrototypeProfile]] = {}
    for f in sorted(feeders, key=lambda f: f.profile_id):
        by_region.setdefault(f.region, []).append(f)

    def one(bus: LoadBus) -> BusSynthesisResult:
        ratio = ratios[bus.bus_id]
        pools = bus_pools(bus, ratio, profiles, facility_profiles)
        region_feeders = by_region.get(bus_region(bus, feeders), [])
        result = build_bus_series(bus, ratio, pools, config, region_feeders)
        log.debug("bus %s: iterations %s, C=%.4g", bus.bus_id, result.iterations, result.lf_constant)
        return result

    ordered = sorted(buses, key=lambda b: b.bus_id)
    if workers <= 1:
        return [one(b) for b in ordered]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, ordered))
