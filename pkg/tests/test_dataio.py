from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rangecast.dataio import (
    AffineScaler,
    CovariateRow,
    CsvFormatError,
    DegenerateFeatureError,
    DuplicateRowError,
    MonthlySeries,
    SeriesGapError,
    TimePoint,
    build_design,
    covariate_rows,
    encode_month,
    fit_scaling,
    make_windows,
    parse_route_csv,
    serialize_route_csv,
)


def csv_text(rows: list[tuple[str, int, int, int]]) -> str:
    lines = ["route,year,month,value"]
    lines += [f"{r},{y},{m},{v}" for r, y, m, v in rows]
    return "\n".join(lines) + "\n"


class TestTimePoint:
    def test_ordering(self):
        assert TimePoint(2020, 12) < TimePoint(2021, 1) < TimePoint(2021, 2)

    def test_plus_wraps_years(self):
        assert TimePoint(2020, 11).plus(3) == TimePoint(2021, 2)
        assert TimePoint(2021, 1).plus(-1) == TimePoint(2020, 12)

    def test_month_range_enforced(self):
        with pytest.raises(ValueError):
            TimePoint(2020, 13)

    def test_parse_round_trip(self):
        assert TimePoint.parse("2021-01") == TimePoint(2021, 1)
        assert str(TimePoint(2021, 1)) == "2021-01"


class TestEncodeMonth:
    def test_march_is_east(self):
        sin, cos = encode_month(3)
        assert sin == pytest.approx(1.0, abs=1e-12)
        assert cos == pytest.approx(0.0, abs=1e-12)

    def test_december_is_north(self):
        sin, cos = encode_month(12)
        assert sin == pytest.approx(0.0, abs=1e-12)
        assert cos == pytest.approx(1.0, abs=1e-12)

    def test_june_is_south(self):
        sin, cos = encode_month(6)
        assert sin == pytest.approx(0.0, abs=1e-12)
        assert cos == pytest.approx(-1.0, abs=1e-12)

    @pytest.mark.parametrize("month", [0, 13, -1])
    def test_out_of_range(self, month):
        with pytest.raises(ValueError):
            encode_month(month)

    def test_unit_circle(self):
        for m in range(1, 13):
            sin, cos = encode_month(m)
            assert sin * sin + cos * cos == pytest.approx(1.0, abs=1e-12)

    def test_consecutive_months_equidistant(self):
        # Including the December -> January wrap.
        def dist(a, b):
            (s1, c1), (s2, c2) = encode_month(a), encode_month(b)
            return math.hypot(s1 - s2, c1 - c2)

        base = dist(1, 2)
        for m in range(1, 13):
            nxt = m % 12 + 1
            assert dist(m, nxt) == pytest.approx(base, abs=1e-12)


class TestParseCsv:
    def test_full_route_history(self):
        # Jan 2009 .. Aug 2024 is 188 months.
        rows = [("CMR", TimePoint(2009, 1).plus(i).year, TimePoint(2009, 1).plus(i).month, i)
                for i in range(188)]
        series = parse_route_csv(csv_text(rows))
        assert len(series) == 1
        assert len(series[0]) == 188
        assert series[0].start == TimePoint(2009, 1)
        assert series[0].end == TimePoint(2024, 8)

    def test_empty_file(self):
        assert parse_route_csv("") == []
        assert parse_route_csv("route,year,month,value\n") == []

    def test_gap_names_missing_month(self):
        text = csv_text([("CMR", 2020, 1, 5), ("CMR", 2020, 3, 7)])
        with pytest.raises(SeriesGapError) as err:
            parse_route_csv(text)
        assert err.value.missing == TimePoint(2020, 2)

    def test_malformed_row_names_line(self):
        text = "route,year,month,value\nCMR,2020,1,5\nCMR,2020,x,7\n"
        with pytest.raises(CsvFormatError) as err:
            parse_route_csv(text)
        assert err.value.line == 3

    def test_negative_value_rejected(self):
        with pytest.raises(CsvFormatError, match="negative"):
            parse_route_csv(csv_text([("CMR", 2020, 1, -5)]))

    def test_duplicate_rejected(self):
        text = csv_text([("CMR", 2020, 1, 5), ("CMR", 2020, 1, 6)])
        with pytest.raises(DuplicateRowError):
            parse_route_csv(text)

    def test_multiple_routes_sorted(self):
        text = csv_text([("WBR", 2020, 1, 1), ("CMR", 2020, 1, 2)])
        series = parse_route_csv(text)
        assert [s.route_id for s in series] == ["CMR", "WBR"]

    def test_round_trip_is_byte_identical(self):
        rows = []
        for route in ("CMR", "EMR"):
            for i in range(30):
                tp = TimePoint(2019, 5).plus(i)
                rows.append((route, tp.year, tp.month, 100 + i))
        text = csv_text(sorted(rows))
        assert serialize_route_csv(parse_route_csv(text)) == text


class TestMonthlySeries:
    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            MonthlySeries("X", TimePoint(2020, 1), (1, -2))

    def test_rejects_non_integer(self):
        with pytest.raises(ValueError):
            MonthlySeries("X", TimePoint(2020, 1), (1.5, 2))

    def test_through_and_tail(self):
        s = MonthlySeries("X", TimePoint(2020, 1), tuple(range(24)))
        head = s.through(TimePoint(2020, 6))
        assert len(head) == 6
        tail = s.tail_after(TimePoint(2020, 6))
        assert len(tail) == 18
        assert tail[0][0] == TimePoint(2020, 7)


class TestWindows:
    @staticmethod
    def tail(start: TimePoint, n: int):
        return [(start.plus(i), i + 1) for i in range(n)]

    def test_43_months_give_32_windows(self):
        windows = make_windows(self.tail(TimePoint(2021, 2), 43))
        assert len(windows) == 32
        assert windows[0].start == TimePoint(2021, 2)
        assert windows[0].end == TimePoint(2022, 1)
        assert windows[-1].start == TimePoint(2023, 9)
        assert windows[-1].end == TimePoint(2024, 8)

    def test_boundary_single_window(self):
        windows = make_windows(self.tail(TimePoint(2021, 2), 12))
        assert len(windows) == 1

    def test_too_short_errors(self):
        with pytest.raises(ValueError):
            make_windows(self.tail(TimePoint(2021, 2), 11))

    def test_sum_and_shift(self):
        windows = make_windows(self.tail(TimePoint(2021, 2), 20))
        for prev, cur in zip(windows, windows[1:]):
            assert cur.start == prev.start.plus(1)
        assert windows[0].actual_sum == sum(range(1, 13))

    @given(st.integers(min_value=12, max_value=80))
    def test_window_count_and_overlap(self, total):
        windows = make_windows(self.tail(TimePoint(2020, 1), total))
        assert len(windows) == total - 12 + 1
        covered = {tp.index for w in windows for tp in
                   [w.start.plus(i) for i in range(12)]}
        assert len(covered) == total  # union covers the tail
        for prev, cur in zip(windows, windows[1:]):
            overlap = set(range(cur.start.index, prev.start.index + 12))
            assert len(overlap) == 11


class TestScaling:
    def test_endpoints(self):
        scaler = AffineScaler(2009, 2021)
        assert scaler.apply(2009) == -1.0
        assert scaler.apply(2021) == 1.0

    def test_affine_extrapolation(self):
        # (2024 - 2009) / (2021 - 2009) maps to -1 + 2 * 15/12 = 1.5
        scaler = AffineScaler(2009, 2021)
        assert scaler.apply(2024) == pytest.approx(1.5, abs=1e-12)

    def test_constant_column_rejected(self):
        with pytest.raises(DegenerateFeatureError):
            AffineScaler(5.0, 5.0)

    @given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
    def test_round_trip(self, x):
        scaler = AffineScaler(-123.0, 456.0)
        assert scaler.invert(scaler.apply(x)) == pytest.approx(x, abs=1e-9)

    def test_round_trip_bulk(self):
        rng = np.random.Generator(np.random.PCG64(42))
        scaler = AffineScaler(10.0, 99.0)
        xs = rng.uniform(-1e5, 1e5, size=1000)
        assert np.allclose(scaler.invert(scaler.apply(xs)), xs, atol=1e-9)
        applied = scaler.apply(np.sort(xs))
        assert np.all(np.diff(applied) > 0)  # strictly increasing

    def test_fit_scaling_names_degenerate_column(self):
        rows = [CovariateRow(2020.0, 0.5, 0.5, 0.0)] * 3
        with pytest.raises(DegenerateFeatureError, match="year"):
            fit_scaling(rows, [1.0, 2.0, 3.0])


class TestBuildDesign:
    def test_shapes_and_passthrough(self, series_10y):
        classes = [0.0, 0.5, 1.0] * 40
        rows = covariate_rows(series_10y, classes)
        scaling = fit_scaling(rows, series_10y.values)
        X, y = build_design(series_10y, classes, scaling)
        assert X.shape == (120, 4)
        assert y.shape == (120,)
        # class column is passed through unscaled
        assert np.array_equal(X[:, 3], np.array(classes))
        # sin/cos columns stay on the unit circle
        assert np.allclose(X[:, 1] ** 2 + X[:, 2] ** 2, 1.0, atol=1e-12)

    def test_length_mismatch(self, series_10y):
        with pytest.raises(ValueError, match="length"):
            covariate_rows(series_10y, [0.0] * 10)

    def test_max_target_scales_to_one(self, series_10y):
        classes = [0.0] * 120
        rows = covariate_rows(series_10y, classes)
        scaling = fit_scaling(rows, series_10y.values)
        _, y = build_design(series_10y, classes, scaling)
        assert y.max() == 1.0
        assert y.min() == -1.0


class TestEdgePaths:
    def test_parse_timepoint_rejects_bad_format(self):
        with pytest.raises(ValueError, match="YYYY-MM"):
            TimePoint.parse("2021/01")
        with pytest.raises(ValueError):
            TimePoint.parse("2021-13")

    def test_value_at_outside_span(self):
        s = MonthlySeries("X", TimePoint(2020, 1), (1, 2, 3))
        assert s.value_at(TimePoint(2020, 2)) == 2
        with pytest.raises(KeyError):
            s.value_at(TimePoint(2021, 1))

    def test_through_before_start(self):
        s = MonthlySeries("X", TimePoint(2020, 1), (1, 2, 3))
        with pytest.raises(ValueError, match="precedes"):
            s.through(TimePoint(2019, 12))

    def test_make_windows_rejects_gapped_tail(self):
        tail = [(TimePoint(2021, 1), 1), (TimePoint(2021, 3), 2)] + [
            (TimePoint(2021, 3).plus(i + 1), 3) for i in range(11)
        ]
        with pytest.raises(SeriesGapError):
            make_windows(tail, horizon=12)

    def test_header_mismatch_names_line_one(self):
        with pytest.raises(CsvFormatError) as err:
            parse_route_csv("a,b,c,d\nCMR,2020,1,5\n")
        assert err.value.line == 1

    def test_short_row_rejected(self):
        with pytest.raises(CsvFormatError, match="4 fields"):
            parse_route_csv("route,year,month,value\nCMR,2020,1\n")
