"""Error metrics against hand-computed values and order relations."""

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loadcast.errors import DimensionError, DomainError
from loadcast.metrics import MetricReport, compute_metrics, relative_error


class TestHandValues:
    def test_two_point_case(self):
        report = compute_metrics([100.0, 200.0], [110.0, 190.0])
        assert abs(report.mae - 10.0) <= 1e-9
        assert abs(report.rmse - 10.0) <= 1e-9
        assert abs(report.mape - 7.5) <= 1e-9
        assert abs(report.nrmse - 20.0 / 3.0) <= 1e-9

    def test_perfect_forecast_is_all_zero(self):
        report = compute_metrics([50.0, 75.0, 125.0], [50.0, 75.0, 125.0])
        assert report.mae == 0.0
        assert report.rmse == 0.0
        assert report.mape == 0.0
        assert report.nrmse == 0.0

    def test_constant_offset(self):
        report = compute_metrics([100.0, 100.0], [103.0, 103.0])
        npt.assert_allclose([report.mae, report.rmse, report.mape,
                             report.nrmse], [3.0, 3.0, 3.0, 3.0], atol=1e-12)

    def test_relative_error_is_absolute_percent(self):
        assert abs(relative_error(100.0, 110.0) - 10.0) <= 1e-12
        assert abs(relative_error(200.0, 190.0) - 5.0) <= 1e-12
        with pytest.raises(DomainError):
            relative_error(0.0, 10.0)


class TestOrderRelations:
    def test_rmse_at_least_mae_on_random_pairs(self):
        rng = np.random.default_rng(61)
        for _ in range(1000):
            size = int(rng.integers(1, 30))
            actual = rng.uniform(10.0, 1000.0, size=size)
            forecast = actual + rng.normal(0.0, 50.0, size=size)
            report = compute_metrics(actual, forecast)
            assert report.rmse >= report.mae - 1e-12

    @given(st.lists(st.tuples(st.floats(1.0, 1e4), st.floats(-1e3, 1e3)),
                    min_size=1, max_size=20))
    @settings(max_examples=80, deadline=None)
    def test_rmse_at_least_mae_property(self, pairs):
        actual = np.array([a for a, _ in pairs])
        forecast = actual + np.array([e for _, e in pairs])
        report = compute_metrics(actual, forecast)
        assert report.rmse >= report.mae - 1e-9

    def test_equal_when_single_point(self):
        report = compute_metrics([123.0], [150.0])
        assert report.rmse == report.mae


class TestValidation:
    def test_nonpositive_actual_rejected(self):
        with pytest.raises(DomainError):
            compute_metrics([100.0, 0.0], [90.0, 10.0])
        with pytest.raises(DomainError):
            compute_metrics([-5.0], [1.0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(DimensionError):
            compute_metrics([1.0, 2.0], [1.0])

    def test_empty_rejected(self):
        with pytest.raises(DimensionError):
            compute_metrics([], [])

    def test_2d_rejected(self):
        with pytest.raises(DimensionError):
            compute_metrics(np.ones((2, 2)), np.ones((2, 2)))


class TestSerialization:
    def test_text_report_round_trips_floats(self):
        report = compute_metrics([100.0, 200.0, 301.0], [110.0, 195.0, 290.0])
        text = report.as_text()
        values = {}
        for line in text.splitlines():
            key, value = line.split()
            values[key] = float(value)
        assert values["mae"] == report.mae
        assert values["rmse"] == report.rmse
        assert values["mape"] == report.mape
        assert values["nrmse"] == report.nrmse

    def test_csv_row_matches_header(self):
        report = MetricReport(mae=1.0, rmse=2.0, mape=3.0, nrmse=4.0)
        header = report.csv_header().split(",")
        row = report.as_csv_row().split(",")
        assert len(header) == len(row) == 4
        assert [float(v) for v in row] == [1.0, 2.0, 3.0, 4.0]
