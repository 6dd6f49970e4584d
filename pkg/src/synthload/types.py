"""Core records and series statistics shared by every stage of the pipeline."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

HOURS_PER_YEAR = 8760

# Non-leap calendar, hour 0 = Jan 1 00:00.
MONTH_DAYS = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)


class LoadType(str, Enum):
    RESIDENTIAL = "residential"
    COMMERCIAL = "commercial"
    INDUSTRIAL = "industrial"


@dataclass(frozen=True, eq=False)
class HourlySeries:
    """One year of hourly real power in MW.

    The value array is copied on construction and marked read-only, so a
    series can be shared freely between threads.
    """

    values: NDArray[np.float64]
    label: str = ""

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=np.float64)
        if arr.shape != (HOURS_PER_YEAR,):
            raise ValueError(
                f"series {self.label!r} must have {HOURS_PER_YEAR} values, got {arr.size}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"series {self.label!r} contains non-finite values")
        if np.any(arr < 0):
            raise ValueError(f"series {self.label!r} contains negative values")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return HOURS_PER_YEAR

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HourlySeries):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.values, other.values)

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def zeros(cls, label: str = "") -> HourlySeries:
        return cls(np.zeros(HOURS_PER_YEAR), label)

    def max(self) -> float:
        return float(self.values.max())

    def mean(self) -> float:
        return series_mean(self)


@dataclass(frozen=True)
class GeoPoint:
    latitude: float
    longitude: float

    def __post_init__(self) -> None:
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} outside [-90, 90]")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude {self.longitude} outside [-180, 180]")


@dataclass(frozen=True)
class LoadBus:
    bus_id: int
    location: GeoPoint
    peak_mw: float
    power_factor: float = 1.0

    def __post_init__(self) -> None:
        if not self.peak_mw > 0:
            raise ValueError(f"bus {self.bus_id}: peak must be positive, got {self.peak_mw}")
        if not 0.0 < self.power_factor <= 1.0:
            raise ValueError(
                f"bus {self.bus_id}: power factor must lie in (0, 1], got {self.power_factor}"
            )


@dataclass(frozen=True)
class CompositionRatio:
    residential: float
    commercial: float
    industrial: float

    def __post_init__(self) -> None:
        parts = (self.residential, self.commercial, self.industrial)
        if any(not 0.0 <= p <= 1.0 for p in parts):
            raise ValueError(f"composition fractions must lie in [0, 1], got {parts}")
        if abs(sum(parts) - 1.0) > 1e-9:
            raise ValueError(f"composition fractions must sum to 1, got {sum(parts)}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.residential, self.commercial, self.industrial)

    def __getitem__(self, kind: LoadType | str) -> float:
        return getattr(self, LoadType(kind).value)


def series_mean(s: HourlySeries) -> float:
    return float(np.mean(s.values))


def load_factor(s: HourlySeries) -> float:
    """Average over peak of the series."""
    return _load_factor(s.values)


def _load_factor(values: NDArray[np.float64]) -> float:
    peak = float(values.max())
    if peak <= 0:
        raise ValueError("degenerate series: load factor undefined for an all-zero series")
    return float(np.mean(values)) / peak


def circular_shift(s: HourlySeries, k: int) -> HourlySeries:
    """Delay the series by ``k`` hours, wrapping across the year boundary.

    ``out[t] == s[(t - k) mod 8760]``; negative ``k`` advances the series.
    """
    return HourlySeries(np.roll(s.values, int(k)), s.label)


def month_slices() -> list[slice]:
    """Hour ranges for the twelve calendar months."""
    bounds = np.concatenate([[0], np.cumsum(MONTH_DAYS) * 24])
    return [slice(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]


def as_series(values: ArrayLike | HourlySeries, label: str = "") -> HourlySeries:
    if isinstance(values, HourlySeries):
        return values
    return HourlySeries(np.asarray(values, dtype=np.float64), label)
