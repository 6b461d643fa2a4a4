"""Forecast accuracy metrics.

All four summary metrics treat the concatenated hourly values of a test
period as one sample.  MAPE and nRMSE are percentages; nRMSE normalizes by
the mean actual load.  Actual loads must be positive, otherwise the
percentage metrics are undefined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError


@dataclass(frozen=True)
class MetricReport:
    """MAE, RMSE, MAPE (percent), and nRMSE (percent)."""

    mae: float
    rmse: float
    mape: float
    nrmse: float

    def as_text(self):
        return (f"mae {self.mae!r}\n"
                f"rmse {self.rmse!r}\n"
                f"mape {self.mape!r}\n"
                f"nrmse {self.nrmse!r}\n")

    @staticmethod
    def csv_header():
        return "mae,rmse,mape,nrmse"

    def as_csv_row(self):
        return f"{self.mae!r},{self.rmse!r},{self.mape!r},{self.nrmse!r}"


def _validated(actual, forecast):
    actual = np.asarray(actual, dtype=np.float64)
    forecast = np.asarray(forecast, dtype=np.float64)
    if actual.shape != forecast.shape or actual.ndim != 1 or actual.size == 0:
        raise DimensionError(
            f"metrics need equal-length nonempty vectors, got {actual.shape} "
            f"and {forecast.shape}")
    if np.any(actual <= 0.0):
        raise DomainError("actual loads must be positive for percentage metrics")
    return actual, forecast


def compute_metrics(actual, forecast):
    """Summary metrics over paired actual and forecast vectors."""
    actual, forecast = _validated(actual, forecast)
    error = actual - forecast
    mae = float(np.mean(np.abs(error)))
    rmse = float(np.sqrt(np.mean(error * error)))
    mape = float(100.0 * np.mean(np.abs(error) / actual))
    nrmse = float(100.0 * rmse / np.mean(actual))
    return MetricReport(mae=mae, rmse=rmse, mape=mape, nrmse=nrmse)


def relative_error(actual, forecast):
    """Percentage error of a single forecast value."""
    if actual <= 0.0:
        raise DomainError(f"actual load must be positive, got {actual}")
    return 100.0 * abs(actual - forecast) / actual
