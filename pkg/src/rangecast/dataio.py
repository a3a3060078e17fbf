"""Monthly route series: parsing, calendar arithmetic, covariate encoding, scaling, windows.

The canonical ingestion format is a UTF-8 CSV with header ``route,year,month,value``,
one row per route-month.  Converting a published spreadsheet into this form is a
manual, documented step; nothing here talks to the network.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

CSV_HEADER = ("route", "year", "month", "value")

#: Standard five route acronyms; free-form identifiers are also accepted.
KNOWN_ROUTES = ("CMR", "EMR", "WMR", "WAR", "WBR")

#: Two full seasonal cycles, the minimum history before any model training.
MIN_TRAINING_MONTHS = 24

#: Order of network input features everywhere a design matrix is built.
FEATURE_COLUMNS = ("year", "month_sin", "month_cos", "class_value")


class CsvFormatError(ValueError):
    """Malformed CSV content; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SeriesGapError(ValueError):
    """A route's months are not contiguous; carries the first missing TimePoint."""

    def __init__(self, route_id: str, missing: "TimePoint"):
        super().__init__(f"route {route_id}: missing month {missing}")
        self.route_id = route_id
        self.missing = missing


class DuplicateRowError(ValueError):
    """Two rows describe the same (route, year, month)."""


class DegenerateFeatureError(ValueError):
    """A feature to be scaled is constant over the training data."""


@dataclass(frozen=True, order=True)
class TimePoint:
    """A calendar month, totally ordered by (year, month)."""

    year: int
    month: int

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise ValueError(f"month must be in 1..12, got {self.month}")

    @property
    def index(self) -> int:
        return self.year * 12 + (self.month - 1)

    @classmethod
    def from_index(cls, index: int) -> "TimePoint":
        return cls(index // 12, index % 12 + 1)

    def plus(self, months: int) -> "TimePoint":
        return TimePoint.from_index(self.index + months)

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"

    @classmethod
    def parse(cls, text: str) -> "TimePoint":
        """Parse ``YYYY-MM``."""
        parts = text.strip().split("-")
        if len(parts) != 2:
            raise ValueError(f"expected YYYY-MM, got {text!r}")
        return cls(int(parts[0]), int(parts[1]))


@dataclass(frozen=True)
class MonthlySeries:
    """Contiguous monthly nonnegative integer counts for one route."""

    route_id: str
    start: TimePoint
    values: tuple[int, ...]

    def __post_init__(self):
        for i, v in enumerate(self.values):
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise ValueError(f"value at position {i} is not an integer: {v!r}")
            if v < 0:
                raise ValueError(f"negative value at {self.start.plus(i)}: {v}")
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end(self) -> TimePoint:
        return self.start.plus(len(self.values) - 1)

    def timepoints(self) -> list[TimePoint]:
        return [self.start.plus(i) for i in range(len(self.values))]

    def value_at(self, tp: TimePoint) -> int:
        offset = tp.index - self.start.index
        if not 0 <= offset < len(self.values):
            raise KeyError(f"{tp} outside series span {self.start}..{self.end}")
        return self.values[offset]

    def through(self, tp: TimePoint) -> "MonthlySeries":
        """Series restricted to months up to and including ``tp``."""
        offset = tp.index - self.start.index
        if offset < 0:
            raise ValueError(f"{tp} precedes series start {self.start}")
        return MonthlySeries(self.route_id, self.start, self.values[: offset + 1])

    def tail_after(self, tp: TimePoint) -> list[tuple[TimePoint, int]]:
        """(TimePoint, value) pairs strictly after ``tp``."""
        return [(p, v) for p, v in zip(self.timepoints(), self.values) if p > tp]


@dataclass(frozen=True)
class CovariateRow:
    """One network input row: calendar position plus the class covariate."""

    year: float
    month_sin: float
    month_cos: float
    class_value: float

    def to_array(self) -> np.ndarray:
        return np.array([self.year, self.month_sin, self.month_cos, self.class_value])


@dataclass(frozen=True)
class AffineScaler:
    """Affine map sending [observed_min, observed_max] onto [-1, 1], never clamped."""

    observed_min: float
    observed_max: float

    def __post_init__(self):
        if not self.observed_min < self.observed_max:
            raise DegenerateFeatureError(
                f"constant feature: min == max == {self.observed_min}"
            )

    def apply(self, x):
        span = self.observed_max - self.observed_min
        return -1.0 + 2.0 * (np.asarray(x, dtype=float) - self.observed_min) / span

    def invert(self, u):
        span = self.observed_max - self.observed_min
        return self.observed_min + (np.asarray(u, dtype=float) + 1.0) * span / 2.0


@dataclass(frozen=True)
class ScalingParams:
    """Scalers for the features that need them.

    ``month_sin``/``month_cos`` live on the unit circle and ``class_value`` is
    already in class units (deliberately unscaled so values above 1 extrapolate),
    so only the year feature and the target are mapped.
    """

    year: AffineScaler
    target: AffineScaler


@dataclass(frozen=True)
class ValidationWindow:
    """A 12-month (by default) slice of the validation tail."""

    index: int
    start: TimePoint
    actual_monthly: tuple[int, ...]

    @property
    def actual_sum(self) -> int:
        return sum(self.actual_monthly)

    @property
    def end(self) -> TimePoint:
        return self.start.plus(len(self.actual_monthly) - 1)


def encode_month(month: int) -> tuple[float, float]:
    """Sine/cosine coordinates of a month on the unit circle, angle 2*pi*month/12."""
    if not 1 <= month <= 12:
        raise ValueError(f"month must be in 1..12, got {month}")
    angle = 2.0 * math.pi * month / 12.0
    return math.sin(angle), math.cos(angle)


def parse_route_csv(text: str | Iterable[str]) -> list[MonthlySeries]:
    """Parse the canonical route-month CSV into one series per route.

    Raises CsvFormatError (with line number) on malformed rows, DuplicateRowError
    on repeated (route, year, month), SeriesGapError naming the first missing
    month, and ValueError on negative values.
    """
    if isinstance(text, str):
        lines = io.StringIO(text)
    else:
        lines = text
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        return []
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise CsvFormatError(1, f"expected header {','.join(CSV_HEADER)}")

    seen: dict[tuple[str, int], tuple[int, int]] = {}  # (route, month index) -> (value, line)
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 4:
            raise CsvFormatError(lineno, f"expected 4 fields, got {len(row)}")
        route = row[0].strip()
        if not route:
            raise CsvFormatError(lineno, "empty route identifier")
        try:
            year, month, value = int(row[1]), int(row[2]), int(row[3])
        except ValueError:
            raise CsvFormatError(lineno, f"non-integer field in {row!r}") from None
        try:
            tp = TimePoint(year, month)
        except ValueError as exc:
            raise CsvFormatError(lineno, str(exc)) from None
        if value < 0:
            raise CsvFormatError(lineno, f"negative value {value} for {route} {tp}")
        key = (route, tp.index)
        if key in seen:
            raise DuplicateRowError(
                f"line {lineno}: duplicate row for {route} {tp} "
                f"(first seen at line {seen[key][1]})"
            )
        seen[key] = (value, lineno)

    series: list[MonthlySeries] = []
    for route in sorted({route for route, _ in seen}):
        entries = sorted((idx, val) for (r, idx), (val, _) in seen.items() if r == route)
        indices = [idx for idx, _ in entries]
        for prev, cur in zip(indices, indices[1:]):
            if cur != prev + 1:
                raise SeriesGapError(route, TimePoint.from_index(prev + 1))
        series.append(
            MonthlySeries(route, TimePoint.from_index(indices[0]), tuple(v for _, v in entries))
        )
    return series


def serialize_route_csv(series: Sequence[MonthlySeries]) -> str:
    """Canonical CSV form: header, then rows sorted by route id and month."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for s in sorted(series, key=lambda s: s.route_id):
        for tp, v in zip(s.timepoints(), s.values):
            writer.writerow([s.route_id, tp.year, tp.month, v])
    return out.getvalue()


def make_windows(
    tail: Sequence[tuple[TimePoint, int]], horizon: int = 12
) -> list[ValidationWindow]:
    """Rolling windows over the validation tail, each shifted one month forward."""
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if len(tail) < horizon:
        raise ValueError(f"tail has {len(tail)} months, need at least {horizon}")
    for (p, _), (q, _) in zip(tail, tail[1:]):
        if q.index != p.index + 1:
            raise SeriesGapError("validation tail", p.plus(1))
    windows = []
    for k in range(len(tail) - horizon + 1):
        chunk = tail[k : k + horizon]
        windows.append(
            ValidationWindow(
                index=k + 1,
                start=chunk[0][0],
                actual_monthly=tuple(v for _, v in chunk),
            )
        )
    return windows


def covariate_rows(series: MonthlySeries, classes: Sequence[float]) -> list[CovariateRow]:
    """Unscaled covariate rows (raw year) aligned 1:1 with the series."""
    class_values = list(getattr(classes, "values", classes))
    if len(class_values) != len(series.values):
        raise ValueError(
            f"class series length {len(class_values)} != series length {len(series.values)}"
        )
    rows = []
    for tp, c in zip(series.timepoints(), class_values):
        sin, cos = encode_month(tp.month)
        rows.append(CovariateRow(float(tp.year), sin, cos, float(c)))
    return rows


def fit_scaling(rows: Sequence[CovariateRow], targets: Sequence[float]) -> ScalingParams:
    """Fit the year and target scalers on training data; raises on constant columns."""
    years = [r.year for r in rows]
    try:
        year = AffineScaler(min(years), max(years))
    except DegenerateFeatureError:
        raise DegenerateFeatureError("year column is constant over the training span") from None
    t = [float(v) for v in targets]
    try:
        target = AffineScaler(min(t), max(t))
    except DegenerateFeatureError:
        raise DegenerateFeatureError("target column is constant over the training span") from None
    return ScalingParams(year=year, target=target)


def build_design(
    series: MonthlySeries, classes: Sequence[float], scaling: ScalingParams
) -> tuple[np.ndarray, np.ndarray]:
    """Scaled design matrix (columns per FEATURE_COLUMNS) and scaled targets."""
    rows = covariate_rows(series, classes)
    X = np.array(
        [
            [scaling.year.apply(r.year), r.month_sin, r.month_cos, r.class_value]
            for r in rows
        ],
        dtype=float,
    )
    y = scaling.target.apply(np.asarray(series.values, dtype=float))
    return X, y


def horizon_design(
    start: TimePoint, class_vector: Sequence[float], scaling: ScalingParams
) -> np.ndarray:
    """Scaled design matrix for a forecast horizon starting at ``start``."""
    X = np.empty((len(class_vector), 4), dtype=float)
    for i, c in enumerate(class_vector):
        tp = start.plus(i)
        sin, cos = encode_month(tp.month)
        X[i] = (scaling.year.apply(float(tp.year)), sin, cos, float(c))
    return X
