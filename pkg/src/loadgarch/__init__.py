"""SARIMA-GARCH short-term load forecasting."""

__version__ = "0.1.0"

from .diagnostics import TestReport, adf_test, ljung_box, mcleod_li
from .errors import DataError, LoadGarchError, ModelError, SelectionError
from .estimation import FittedModel, fit, select
from .evaluation import ScoreReport, compare, score
from .forecasting import ForecastResult, forecast, psi_weights
from .innovations import Family, InnovationDist
from .model import (
    FilterOutput,
    ModelParams,
    ModelSpec,
    log_likelihood,
    mean_filter,
    simulate,
    variance_filter,
)
from .series import LoadSeries, ReturnSeries, log_returns, read_load_csv, reconstruct_levels, split

__all__ = [
    "DataError",
    "Family",
    "FilterOutput",
    "FittedModel",
    "ForecastResult",
    "InnovationDist",
    "LoadGarchError",
    "LoadSeries",
    "ModelError",
    "ModelParams",
    "ModelSpec",
    "ReturnSeries",
    "ScoreReport",
    "SelectionError",
    "TestReport",
    "adf_test",
    "compare",
    "fit",
    "forecast",
    "ljung_box",
    "log_likelihood",
    "log_returns",
    "mcleod_li",
    "mean_filter",
    "psi_weights",
    "read_load_csv",
    "reconstruct_levels",
    "score",
    "select",
    "simulate",
    "split",
    "variance_filter",
]
