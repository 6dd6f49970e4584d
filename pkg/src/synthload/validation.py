"""Load-series metrics and reference-band checks.

Three metrics: monthly load factors, the distribution of mean-normalized
load levels, and the hourly autocorrelation function.  Each is compared
pointwise against a closed ``[lower, upper]`` band.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping

import numpy as np

from .ingest import IngestError, _csv_text, _rows, fmt
from .types import HOURS_PER_YEAR, HourlySeries, _load_factor, month_slices

METRICS = ("monthly_load_factor", "distribution_curve", "autocorrelation")
BAND_HEADER = ["axis", "lower", "upper"]
METRIC_CSV_HEADER = ["axis", "value", "lower", "upper"]

DEFAULT_BIN_WIDTH = 0.05
DISTRIBUTION_MAX_PU = 3.0
DEFAULT_MAX_LAG = 48


@dataclass(frozen=True, eq=False)
class ReferenceBand:
    metric: str
    axis: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        axis, lo, hi = (np.array(a, dtype=np.float64) for a in (self.axis, self.lower, self.upper))
        if axis.size == 0:
            raise ValueError(f"{self.metric} band: empty axis")
        if not (axis.shape == lo.shape == hi.shape) or axis.ndim != 1:
            raise ValueError(f"{self.metric} band: axis, lower and upper lengths differ")
        if np.any(np.diff(axis) <= 0):
            raise ValueError(f"{self.metric} band: axis must be strictly increasing")
        if np.any(lo > hi):
            raise ValueError(f"{self.metric} band: lower exceeds upper")
        for name, arr in (("axis", axis), ("lower", lo), ("upper", hi)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ReferenceBand):
            return NotImplemented
        return self.metric == other.metric and all(
            np.array_equal(a, b)
            for a, b in ((self.axis, other.axis), (self.lower, other.lower), (self.upper, other.upper))
        )


@dataclass(frozen=True)
class BandCheck:
    inside: np.ndarray
    pass_fraction: float


@dataclass
class MetricResult:
    metric: str
    axis: np.ndarray
    values: np.ndarray
    band: ReferenceBand | None = None
    check: BandCheck | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        if self.error is not None:
            return {"error": self.error}
        out = {"axis": self.axis.tolist(), "values": self.values.tolist()}
        if self.check is not None:
            out["lower"] = self.band.lower.tolist()
            out["upper"] = self.band.upper.tolist()
            out["inside"] = self.check.inside.tolist()
            out["pass_fraction"] = self.check.pass_fraction
        return out


@dataclass
class ValidationReport:
    """Metric results per series label, plus the system (sum over buses)."""

    series: dict[str, dict[str, MetricResult]] = field(default_factory=dict)
    system: dict[str, MetricResult] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "system": {m: r.to_dict() for m, r in self.system.items()},
            "series": {
                label: {m: r.to_dict() for m, r in metrics.items()}
                for label, metrics in self.series.items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


# ---------------------------------------------------------------------------
# metrics


def monthly_load_factors(s: HourlySeries) -> np.ndarray:
    out = np.empty(12)
    for m, sl in enumerate(month_slices()):
        chunk = s.values[sl]
        if chunk.max() <= 0:
            raise ValueError(f"month {m + 1} is all zeros; load factor undefined")
        out[m] = _load_factor(chunk)
    return out


def distribution_axis(bin_width_pu: float = DEFAULT_BIN_WIDTH) -> np.ndarray:
    """Bin centers 0, w, 2w, ... up to 3 p.u.; bin k covers [(k - 1/2)w, (k + 1/2)w)."""
    if not bin_width_pu > 0:
        raise ValueError("bin width must be positive")
    n = int(np.floor(DISTRIBUTION_MAX_PU / bin_width_pu + 1e-9)) + 1
    return np.round(np.arange(n) * bin_width_pu, 10)


def distribution_curve(
    s: HourlySeries, bin_width_pu: float = DEFAULT_BIN_WIDTH
) -> tuple[np.ndarray, np.ndarray]:
    """Fraction of hours at each mean-normalized load level.

    Returns (bin centers, fractions).  Levels beyond the last center land in
    the last bin.
    """
    centers = distribution_axis(bin_width_pu)
    mean = float(np.mean(s.values))
    if mean <= 0:
        raise ValueError("distribution curve undefined for a zero-mean series")
    pu = s.values / mean
    idx = np.clip(np.floor(pu / bin_width_pu + 0.5).astype(np.int64), 0, centers.size - 1)
    counts = np.bincount(idx, minlength=centers.size)
    return centers, counts / HOURS_PER_YEAR


def autocorrelation(s: HourlySeries, max_lag: int = DEFAULT_MAX_LAG) -> np.ndarray:
    """Biased sample ACF for lags ``0..max_lag``."""
    if not 0 <= max_lag < HOURS_PER_YEAR:
        raise ValueError(f"max_lag must lie in [0, {HOURS_PER_YEAR})")
    d = s.values - s.values.mean()
    denom = float(np.dot(d, d))
    if denom <= 0 or np.ptp(s.values) == 0:
        raise ValueError("zero variance: autocorrelation undefined for a constant series")
    n = d.size
    r = np.array([np.dot(d[: n - k], d[k:]) for k in range(max_lag + 1)]) / denom
    r[0] = 1.0
    return r


# ---------------------------------------------------------------------------
# bands


def band_check(axis: np.ndarray, values: np.ndarray, band: ReferenceBand) -> BandCheck:
    axis = np.asarray(axis, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if axis.size == 0:
        raise ValueError("empty metric axis")
    if axis.shape != band.axis.shape or not np.allclose(axis, band.axis, rtol=1e-9, atol=1e-12):
        raise ValueError(f"{band.metric}: metric axis does not match band axis")
    if values.shape != axis.shape:
        raise ValueError(f"{band.metric}: {values.size} values for {axis.size} axis points")
    inside = (band.lower <= values) & (values <= band.upper)
    return BandCheck(inside, float(inside.mean()))


def parse_band_csv(text: str, metric: str) -> ReferenceBand:
    rows = []
    for lineno, (a, lo, hi) in _rows(text, BAND_HEADER, f"{metric} band"):
        try:
            rows.append((float(a), float(lo), float(hi)))
        except ValueError as exc:
            raise IngestError(f"{metric} band: line {lineno}: {exc}") from None
    if not rows:
        raise IngestError(f"{metric} band: no rows")
    a, lo, hi = (np.array(c) for c in zip(*rows))
    try:
        return ReferenceBand(metric, a, lo, hi)
    except ValueError as exc:
        raise IngestError(str(exc)) from None


def format_band_csv(band: ReferenceBand) -> str:
    return _csv_text(
        BAND_HEADER,
        ([fmt(a), fmt(lo), fmt(hi)] for a, lo, hi in zip(band.axis, band.lower, band.upper)),
    )


def default_bands() -> dict[str, ReferenceBand]:
    """The shipped qualitative bands (see README), keyed by metric."""
    root = resources.files("synthload") / "bands"
    return {m: parse_band_csv((root / f"{m}.csv").read_text(), m) for m in METRICS}


def format_metric_csv(result: MetricResult) -> str:
    """Plot-ready ``axis,value,lower,upper``; band columns empty without a band."""
    rows = []
    for i, (a, v) in enumerate(zip(result.axis, result.values)):
        if result.band is None:
            rows.append([fmt(a), fmt(v), "", ""])
        else:
            rows.append([fmt(a), fmt(v), fmt(result.band.lower[i]), fmt(result.band.upper[i])])
    return _csv_text(METRIC_CSV_HEADER, rows)


def parse_metric_csv(text: str, metric: str) -> MetricResult:
    axis, values, lower, upper = [], [], [], []
    for lineno, (a, v, lo, hi) in _rows(text, METRIC_CSV_HEADER, f"{metric} csv"):
        try:
            axis.append(float(a))
            values.append(float(v))
            if lo or hi:
                lower.append(float(lo))
                upper.append(float(hi))
        except ValueError as exc:
            raise IngestError(f"{metric} csv: line {lineno}: {exc}") from None
    axis_arr, values_arr = np.array(axis), np.array(values)
    if not lower:
        return MetricResult(metric, axis_arr, values_arr)
    band = ReferenceBand(metric, axis_arr, np.array(lower), np.array(upper))
    return MetricResult(metric, axis_arr, values_arr, band, band_check(axis_arr, values_arr, band))


# ---------------------------------------------------------------------------
# full suite


def compute_metrics(
    s: HourlySeries,
    bands: Mapping[str, ReferenceBand] | None = None,
    bin_width_pu: float = DEFAULT_BIN_WIDTH,
    max_lag: int = DEFAULT_MAX_LAG,
) -> dict[str, MetricResult]:
    """All three metrics for one series.

    A metric that is undefined for this series (e.g. the autocorrelation of
    a constant) is reported with ``error`` set instead of failing the rest.
    Band/axis mismatches still raise.
    """
    bands = bands or {}
    calculators = {
        "monthly_load_factor": lambda: (
            np.arange(1, 13, dtype=np.float64), monthly_load_factors(s)
        ),
        "distribution_curve": lambda: distribution_curve(s, bin_width_pu),
        "autocorrelation": lambda: (
            np.arange(max_lag + 1, dtype=np.float64), autocorrelation(s, max_lag)
        ),
    }
    out = {}
    for metric, calc in calculators.items():
        try:
            axis, values = calc()
        except ValueError as exc:
            empty = np.empty(0)
            out[metric] = MetricResult(metric, empty, empty, error=str(exc))
            continue
        band = bands.get(metric)
        check = band_check(axis, values, band) if band is not None else None
        out[metric] = MetricResult(metric, axis, values, band, check)
    return out


def validate(
    series: Mapping[int | str, HourlySeries],
    bands: Mapping[str, ReferenceBand] | None = None,
    bin_width_pu: float = DEFAULT_BIN_WIDTH,
    max_lag: int = DEFAULT_MAX_LAG,
) -> ValidationReport:
    """Metrics for each series and for their sum."""
    if not series:
        raise ValueError("nothing to validate")
    report = ValidationReport()
    total = np.zeros(HOURS_PER_YEAR)
    for key in sorted(series):
        s = series[key]
        total += s.values
        report.series[str(key)] = compute_metrics(s, bands, bin_width_pu, max_lag)
    report.system = compute_metrics(HourlySeries(total, "system"), bands, bin_width_pu, max_lag)
    return report
