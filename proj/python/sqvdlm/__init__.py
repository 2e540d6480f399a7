"""Dynamic linear models for monthly targets with replicated search-volume series."""

from ._core import (
    Panel,
    SqvdlmError,
    adf_test,
    dlm0,
    dlm_forecast,
    fit,
    holt_winters,
    ljung_box,
    mae,
    mape,
    prewhitened_ccf,
    rmse,
    run_cli,
    sarima,
    simulate,
    snaive,
)

__all__ = [
    "Panel",
    "SqvdlmError",
    "adf_test",
    "dlm0",
    "dlm_forecast",
    "fit",
    "holt_winters",
    "ljung_box",
    "mae",
    "mape",
    "prewhitened_ccf",
    "rmse",
    "run_cli",
    "sarima",
    "simulate",
    "snaive",
]
