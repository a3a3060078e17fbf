"""Cyclostationary dispersion statistics and the three-level class covariate.

Historical values are classified against sample-standard-deviation thresholds of
their own calendar month; the covariate is treated as continuous downstream, so
expert-assigned values between or beyond the three levels are legal.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import Sequence

from .dataio import MonthlySeries, TimePoint

#: The three default class levels, lowest regime first.
CLASS_LEVELS = (0.0, 0.5, 1.0)


class ClassCase(enum.Enum):
    """How horizon classes are supplied in validation."""

    PRECISE = "precise"
    MEAN = "mean"
    APPROXIMATED = "approx"


class ZeroDispersionError(ValueError):
    """A threshold would be taken from a zero sample standard deviation."""


@dataclass(frozen=True)
class MonthlyStats:
    """Per-calendar-month and stationary sample moments of a series.

    Sample standard deviations always use the n-1 denominator.
    """

    mean_by_month: tuple[float, ...]
    s_by_month: tuple[float, ...]
    n_by_month: tuple[int, ...]
    mean: float
    s: float
    n: int

    @property
    def snr_by_month(self) -> tuple[float, ...]:
        return tuple(
            m / s if s > 0 else math.inf for m, s in zip(self.mean_by_month, self.s_by_month)
        )

    @property
    def snr(self) -> float:
        return self.mean / self.s if self.s > 0 else math.inf

    def s_for(self, month: int) -> float:
        if not 1 <= month <= 12:
            raise ValueError(f"month must be in 1..12, got {month}")
        return self.s_by_month[month - 1]


@dataclass(frozen=True)
class ClassSeries:
    """Class covariate values aligned to a series or horizon, with provenance."""

    values: tuple[float, ...]
    provenance: str  # "computed", "expert", or "altered:<case>"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.provenance == "computed":
            bad = [v for v in self.values if v not in CLASS_LEVELS]
            if bad:
                raise ValueError(f"computed classes must be in {CLASS_LEVELS}, got {bad[0]}")

    def __len__(self) -> int:
        return len(self.values)


def _moments(values: Sequence[float]) -> tuple[float, float]:
    """Mean and sample (n-1) standard deviation via a two-pass computation."""
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def monthly_stats(series: MonthlySeries) -> MonthlyStats:
    """Statistics by calendar month across years, plus the stationary block.

    Every calendar month must have at least two observations.
    """
    buckets: dict[int, list[int]] = {m: [] for m in range(1, 13)}
    for tp, v in zip(series.timepoints(), series.values):
        buckets[tp.month].append(v)
    for m in range(1, 13):
        if len(buckets[m]) < 2:
            raise ValueError(
                f"route {series.route_id}: calendar month {m} has "
                f"{len(buckets[m])} observation(s), need at least 2"
            )
    means, sds, ns = [], [], []
    for m in range(1, 13):
        mean, s = _moments(buckets[m])
        means.append(mean)
        sds.append(s)
        ns.append(len(buckets[m]))
    mean_all, s_all = _moments(series.values)
    return MonthlyStats(
        mean_by_month=tuple(means),
        s_by_month=tuple(sds),
        n_by_month=tuple(ns),
        mean=mean_all,
        s=s_all,
        n=len(series.values),
    )


def classify_value(x: float, s: float) -> float:
    """Class of a value against dispersion thresholds s and 2s (left-closed)."""
    if not s > 0:
        raise ZeroDispersionError(f"threshold standard deviation must be > 0, got {s}")
    if x < s:
        return 0.0
    if x < 2.0 * s:
        return 0.5
    return 1.0


def zscore_classify(x: float, mean: float, s: float) -> float:
    """Standard-score form: Z = (x - mean)/s against a = 1 - SNR, b = 2 - SNR."""
    if not s > 0:
        raise ZeroDispersionError(f"threshold standard deviation must be > 0, got {s}")
    snr = mean / s
    z = (x - mean) / s
    a = 1.0 - snr
    b = 2.0 - snr
    if z < a:
        return 0.0
    if z < b:
        return 0.5
    return 1.0


def classify_series(series: MonthlySeries, stats: MonthlyStats) -> ClassSeries:
    """Classify each observation against its own calendar month's threshold."""
    values = tuple(
        classify_value(float(v), stats.s_for(tp.month))
        for tp, v in zip(series.timepoints(), series.values)
    )
    return ClassSeries(values=values, provenance="computed")


def nearest_class_level(value: float) -> float:
    """Closest default class level, exact midpoints resolving upward."""
    if value < 0.25:
        return 0.0
    if value < 0.75:
        return 0.5
    return 1.0


def alter_case(precise: Sequence[float], case: ClassCase) -> ClassSeries:
    """Turn 12 precise monthly classes into the validation-time variant.

    PRECISE keeps them; MEAN replaces each 6-month half by its arithmetic mean;
    APPROXIMATED additionally rounds each half-mean to the nearest default level.
    """
    values = list(getattr(precise, "values", precise))
    if len(values) != 12:
        raise ValueError(f"expected exactly 12 monthly classes, got {len(values)}")
    if case is ClassCase.PRECISE:
        out = values
    else:
        halves = [values[:6], values[6:]]
        out = []
        for half in halves:
            m = sum(half) / 6.0
            if case is ClassCase.APPROXIMATED:
                m = nearest_class_level(m)
            out.extend([m] * 6)
    return ClassSeries(values=tuple(out), provenance=f"altered:{case.value}")


def class_series_csv(route_id: str, start: TimePoint, classes: ClassSeries) -> str:
    """Serialize a class series as ``route,year,month,class,provenance``."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["route", "year", "month", "class", "provenance"])
    for i, value in enumerate(classes.values):
        tp = start.plus(i)
        writer.writerow([route_id, tp.year, tp.month, repr(value), classes.provenance])
    return out.getvalue()
