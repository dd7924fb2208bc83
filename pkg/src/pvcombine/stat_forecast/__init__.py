"""Statistical base forecasters: seasonal naive and (S)ARIMA(X)."""

from .arima import (
    ArimaModel,
    ArimaOrder,
    FourierSpec,
    build_model,
    fit_arima,
    forecast_arima,
    forecast_rolling,
    is_stationary,
)
from .auto import (
    SearchConfig,
    auto_arima,
    auto_order,
    fit_high_resolution_arima,
    fourier_terms,
    kpss_statistic,
    seasonal_strength,
)
from .differencing import difference, undifference
from .naive import seasonal_naive, seasonal_naive_at

__all__ = [
    "ArimaModel",
    "ArimaOrder",
    "FourierSpec",
    "SearchConfig",
    "auto_arima",
    "auto_order",
    "build_model",
    "difference",
    "fit_arima",
    "fit_high_resolution_arima",
    "forecast_arima",
    "forecast_rolling",
    "fourier_terms",
    "is_stationary",
    "kpss_statistic",
    "seasonal_naive",
    "seasonal_naive_at",
    "seasonal_strength",
    "undifference",
]
