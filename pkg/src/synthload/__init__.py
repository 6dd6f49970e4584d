"""Synthetic bus-level hourly electric load time series.

Bottom-up aggregation of prototype building, facility and feeder profiles
into year-long bus series, with load-factor, distribution and
autocorrelation validation and a behind-the-meter solar scenario builder.
"""

__version__ = "0.1.0"

from .types import (  # noqa: E402
    HOURS_PER_YEAR,
    CompositionRatio,
    GeoPoint,
    HourlySeries,
    LoadBus,
    LoadType,
    circular_shift,
    load_factor,
    series_mean,
)

__all__ = [
    "HOURS_PER_YEAR",
    "CompositionRatio",
    "GeoPoint",
    "HourlySeries",
    "LoadBus",
    "LoadType",
    "circular_shift",
    "load_factor",
    "series_mean",
]
