from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rangecast.classify import (
    ClassCase,
    ClassSeries,
    ZeroDispersionError,
    alter_case,
    class_series_csv,
    classify_series,
    classify_value,
    monthly_stats,
    nearest_class_level,
    zscore_classify,
)
from rangecast.dataio import MonthlySeries, TimePoint

# Example alteration input: two 6-month halves of precise classes.
FIG_EXAMPLE = (0.0, 0.0, 0.0, 0.5, 0.5, 0.0, 1.0, 1.0, 0.5, 0.0, 0.5, 0.5)


def flat_series(values: list[int]) -> MonthlySeries:
    return MonthlySeries("X", TimePoint(2010, 1), tuple(values))


class TestMonthlyStats:
    def test_two_pass_oracle(self):
        # 4 years of data; month m holds {m, 2m, 3m, 4m} across years.
        values = []
        for year in range(1, 5):
            values.extend(year * m for m in range(1, 13))
        series = flat_series(values)
        stats = monthly_stats(series)
        for m in range(1, 13):
            sample = [m, 2 * m, 3 * m, 4 * m]
            mean = sum(sample) / 4
            s = math.sqrt(sum((v - mean) ** 2 for v in sample) / 3)
            assert stats.mean_by_month[m - 1] == pytest.approx(mean, rel=1e-12)
            assert stats.s_by_month[m - 1] == pytest.approx(s, rel=1e-12)
            assert stats.n_by_month[m - 1] == 4
        all_mean = sum(values) / len(values)
        all_s = math.sqrt(sum((v - all_mean) ** 2 for v in values) / (len(values) - 1))
        assert stats.mean == pytest.approx(all_mean, rel=1e-12)
        assert stats.s == pytest.approx(all_s, rel=1e-12)
        assert stats.n == 48

    def test_requires_two_observations_per_month(self):
        with pytest.raises(ValueError, match="at least 2"):
            monthly_stats(flat_series(list(range(23))))

    def test_constant_series_has_zero_s(self):
        stats = monthly_stats(flat_series([5] * 24))
        assert all(s == 0.0 for s in stats.s_by_month)
        with pytest.raises(ZeroDispersionError):
            classify_value(5.0, stats.s_for(1))


class TestClassifyValue:
    def test_below_s(self):
        assert classify_value(100, 300) == 0.0

    def test_at_s_boundary_is_half(self):
        assert classify_value(300, 300) == 0.5

    def test_at_two_s_boundary_is_one(self):
        assert classify_value(600, 300) == 1.0

    def test_nonpositive_s_rejected(self):
        with pytest.raises(ZeroDispersionError):
            classify_value(1.0, 0.0)

    @given(st.floats(min_value=0, max_value=1e6), st.floats(min_value=1e-6, max_value=1e6))
    def test_monotone_in_x(self, x, s):
        assert classify_value(x, s) <= classify_value(x * 1.5 + 1.0, s)


class TestZScoreEquivalence:
    def test_thousand_random_triples_exact(self):
        rng = np.random.Generator(np.random.PCG64(2024))
        for _ in range(1000):
            x = rng.uniform(0, 1000)
            mean = rng.uniform(1e-3, 1000)
            s = rng.uniform(1e-3, 1000)
            assert zscore_classify(x, mean, s) == classify_value(x, s)

    def test_boundary_consistency_snr_one(self):
        # x = mean with SNR = 1 sits exactly on the lower threshold.
        assert zscore_classify(4.0, 4.0, 4.0) == classify_value(4.0, 4.0) == 0.5

    def test_double_mean_snr_one_is_class_one(self):
        assert zscore_classify(8.0, 4.0, 4.0) == 1.0


class TestClassifySeries:
    def test_historic_max_above_two_s(self):
        values = []
        for year in range(4):
            values.extend(10 + year + m for m in range(12))
        # bump one January far above the month's spread
        values[36] = 1000
        series = flat_series(values)
        stats = monthly_stats(series)
        classes = classify_series(series, stats)
        assert classes.values[36] == 1.0

    def test_identical_years_error(self):
        series = flat_series(list(range(1, 13)) * 4)
        stats = monthly_stats(series)
        with pytest.raises(ZeroDispersionError):
            classify_series(series, stats)

    def test_exponential_split(self):
        rng = np.random.Generator(np.random.PCG64(99))
        draws = rng.exponential(1.0, size=100_000)
        s = float(np.std(draws, ddof=1))
        classes = np.array([classify_value(x, s) for x in draws])
        f0 = np.mean(classes == 0.0)
        f05 = np.mean(classes == 0.5)
        f1 = np.mean(classes == 1.0)
        assert f0 == pytest.approx(1 - math.exp(-1), abs=0.01)
        assert f05 == pytest.approx(math.exp(-1) - math.exp(-2), abs=0.01)
        assert f1 == pytest.approx(math.exp(-2), abs=0.01)

    def test_scale_invariance(self):
        rng = np.random.Generator(np.random.PCG64(5))
        series = flat_series([int(v) for v in rng.integers(1, 200, size=48)])
        stats = monthly_stats(series)
        baseline = classify_series(series, stats)
        for k in (2, 7):
            scaled = flat_series([k * v for v in series.values])
            scaled_stats = monthly_stats(scaled)
            assert classify_series(scaled, scaled_stats).values == baseline.values


class TestAlterCase:
    def test_mean_case_half_averages(self):
        out = alter_case(FIG_EXAMPLE, ClassCase.MEAN)
        assert out.values[:6] == (pytest.approx(1 / 6),) * 6
        assert out.values[6:] == (pytest.approx(3.5 / 6),) * 6

    def test_approximated_case_rounds(self):
        out = alter_case(FIG_EXAMPLE, ClassCase.APPROXIMATED)
        assert out.values[:6] == (0.0,) * 6
        assert out.values[6:] == (0.5,) * 6

    def test_precise_case_identity(self):
        out = alter_case(FIG_EXAMPLE, ClassCase.PRECISE)
        assert out.values == FIG_EXAMPLE

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            alter_case((0.0,) * 11, ClassCase.MEAN)

    def test_midpoints_round_upward(self):
        assert nearest_class_level(0.25) == 0.5
        assert nearest_class_level(0.75) == 1.0
        assert nearest_class_level(0.24) == 0.0
        assert nearest_class_level(0.74) == 0.5

    @given(st.lists(st.sampled_from([0.0, 0.5, 1.0]), min_size=12, max_size=12))
    def test_case_algebra(self, precise):
        mean_out = alter_case(precise, ClassCase.MEAN)
        approx_out = alter_case(precise, ClassCase.APPROXIMATED)
        for half in (slice(0, 6), slice(6, 12)):
            half_values = set(mean_out.values[half])
            assert len(half_values) == 1
            assert mean_out.values[half][0] == pytest.approx(sum(precise[half]) / 6)
        assert all(v in (0.0, 0.5, 1.0) for v in approx_out.values)


class TestClassSeries:
    def test_computed_values_validated(self):
        with pytest.raises(ValueError):
            ClassSeries(values=(0.3,), provenance="computed")
        ClassSeries(values=(0.3,), provenance="expert")  # fine

    def test_csv_serialization(self):
        classes = ClassSeries(values=(0.0, 0.5, 1.2), provenance="expert")
        text = class_series_csv("CMR", TimePoint(2024, 11), classes)
        lines = text.splitlines()
        assert lines[0] == "route,year,month,class,provenance"
        assert lines[1] == "CMR,2024,11,0.0,expert"
        assert lines[3] == "CMR,2025,1,1.2,expert"


class TestStatsEdges:
    def test_s_for_validates_month(self):
        stats = monthly_stats(flat_series(list(range(48))))
        with pytest.raises(ValueError):
            stats.s_for(0)
        with pytest.raises(ValueError):
            stats.s_for(13)

    def test_zero_dispersion_snr_is_infinite(self):
        stats = monthly_stats(flat_series([5] * 24))
        assert all(v == math.inf for v in stats.snr_by_month)
        assert stats.snr == math.inf
