"""Multi-step return, variance and load-level forecasts.

Return means iterate the mean recursion with future shocks at zero. The
j-step forecast-error variance is ``sum_i psi_i^2 * E[sigma^2_{T+j-i}]``,
with the GARCH variance forecast ``E[sigma^2_{T+k}]`` relaxing toward its
unconditional level at rate ``alpha + beta``. Level bands come from the
cumulative log-return, so they stay positive and exact at every horizon.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import pandas as pd

from . import _recursions
from .errors import DataError, ModelError
from .estimation import FittedModel
from .innovations import quantile
from .model import ModelParams, ModelSpec, _as_arrays, ar_is_stationary, differenced, filter_model
from .series import HOUR, ReturnSeries, format_timestamp


def psi_weights(spec: ModelSpec, params: ModelParams, n: int) -> np.ndarray:
    """First ``n`` weights of the MA(inf) form ``theta(L)Theta(L^s) / (phi(L)Phi(L^s))``."""
    params.check_spec(spec)
    ar = params.ar_combined
    if not ar_is_stationary(ar):
        raise ModelError("psi weights need a stationary AR polynomial")
    ma = params.ma_combined
    psi = np.zeros(n)
    if n == 0:
        return psi
    psi[0] = 1.0
    for j in range(1, n):
        acc = ma.get(j, 0.0)
        for k, coef in ar.items():
            if k <= j:
                acc += coef * psi[j - k]
        psi[j] = acc
    return psi


def _return_psi(spec: ModelSpec, params: ModelParams, n: int) -> np.ndarray:
    psi = psi_weights(spec, params, n)
    # (1 - L)^-1 turns psi weights of the difference into those of the level
    return np.cumsum(psi) if spec.d else psi


def variance_path(params: ModelParams, last_shock: float, last_variance: float, h: int) -> np.ndarray:
    """``E[sigma^2_{T+j}]`` for ``j = 1..h`` given the final shock and variance."""
    out = np.empty(h)
    out[0] = params.garch_omega + params.garch_alpha * last_shock**2 + params.garch_beta * last_variance
    for j in range(1, h):
        out[j] = params.garch_omega + params.persistence * out[j - 1]
    return out


@dataclass(frozen=True, eq=False)
class ForecastResult:
    horizon: int
    return_mean: np.ndarray
    return_variance: np.ndarray
    level_point: np.ndarray
    level_lower: np.ndarray
    level_upper: np.ndarray
    origin_level: float
    coverage: float
    timestamps: np.ndarray | None = None
    cumulative_variance: np.ndarray | None = None

    def __post_init__(self):
        for name in ("return_mean", "return_variance", "level_point", "level_lower", "level_upper"):
            if np.shape(getattr(self, name)) != (self.horizon,):
                raise ModelError(f"{name} must have length {self.horizon}")
        if not np.all(self.return_variance > 0):
            raise ModelError("forecast variances must be positive")
        if not (np.all(self.level_lower < self.level_point) and np.all(self.level_point < self.level_upper)):
            raise ModelError(
                "prediction band does not bracket the point forecast; "
                "raise the coverage for this skewed innovation family"
            )

    def frame(self, actual=None) -> pd.DataFrame:
        data = {}
        if self.timestamps is not None:
            data["timestamp"] = [format_timestamp(t) for t in self.timestamps]
        if actual is not None:
            col = np.full(self.horizon, np.nan)
            actual = np.asarray(actual, dtype=float)[: self.horizon]
            col[: actual.size] = actual
            data["actual"] = col
        data["level_point"] = self.level_point
        data["level_lower"] = self.level_lower
        data["level_upper"] = self.level_upper
        return pd.DataFrame(data)

    def to_csv(self, path, actual=None) -> None:
        self.frame(actual).to_csv(path, index=False, float_format="%.10g", na_rep="")

    def to_dict(self) -> dict:
        d = {
            "horizon": self.horizon,
            "coverage": self.coverage,
            "origin_level": self.origin_level,
            "timestamps": None if self.timestamps is None else [format_timestamp(t) for t in self.timestamps],
        }
        for name in ("return_mean", "return_variance", "level_point", "level_lower", "level_upper"):
            d[name] = getattr(self, name).tolist()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def forecast(
    model: FittedModel,
    returns,
    origin_level: float | None = None,
    h: int = 24,
    coverage: float = 0.95,
    *,
    level_correction: bool = False,
) -> ForecastResult:
    """Forecast ``h`` steps past the end of ``returns``.

    ``returns`` is the series the model was fitted on (array or
    :class:`ReturnSeries`). ``origin_level`` is the last observed load level
    and defaults to the one rebuilt from a ReturnSeries. With
    ``level_correction`` the point forecast carries the lognormal
    ``exp(V / 2)`` factor, i.e. a mean instead of a median.
    """
    if h < 1:
        raise ModelError(f"horizon must be >= 1, got {h}")
    if not 0.0 < coverage < 1.0:
        raise ModelError(f"coverage must lie in (0, 1), got {coverage}")
    if origin_level is None:
        if not isinstance(returns, ReturnSeries):
            raise ModelError("origin_level is required when returns carry no levels")
        origin_level = returns.last_level
    origin_level = float(origin_level)
    if not origin_level > 0:
        raise DataError(f"origin level must be positive, got {origin_level}")

    spec, params = model.spec, model.params
    r = np.asarray(getattr(returns, "values", returns), dtype=float)
    y = differenced(spec, r)
    filt = filter_model(spec, params, r)
    a, s2 = filt.residuals, filt.cond_variance

    p = spec.max_lag
    ar_lags, ar_coefs = _as_arrays(params.ar_combined)
    ma_lags, ma_coefs = _as_arrays(params.ma_combined)
    if p:
        pre_y, pre_a = y[-p:], a[-p:]
    else:
        pre_y = pre_a = np.zeros(0)
    y_hat = _recursions.arma_generate(
        np.zeros(h), params.constant, ar_lags, ar_coefs, ma_lags, ma_coefs, pre_y, pre_a
    )
    return_mean = r[-1] + np.cumsum(y_hat) if spec.d else y_hat

    sigma2 = variance_path(params, a[-1], s2[-1], h)
    psi = _return_psi(spec, params, h)
    psi_cum = np.cumsum(psi)
    return_variance = np.empty(h)
    cumulative_variance = np.empty(h)
    for j in range(h):
        # error of step j+1 loads shock T+m (m = 1..j+1) with psi_{j+1-m}
        weights = psi[j::-1]
        return_variance[j] = weights**2 @ sigma2[: j + 1]
        cumulative_variance[j] = psi_cum[j::-1] ** 2 @ sigma2[: j + 1]

    dist = params.innovation_dist(spec)
    q_lo = quantile(dist, 0.5 * (1.0 - coverage))
    q_hi = quantile(dist, 0.5 * (1.0 + coverage))
    cum_mean = np.cumsum(return_mean)
    sd = np.sqrt(cumulative_variance)

    if level_correction:
        level_point = origin_level * np.exp(cum_mean + 0.5 * cumulative_variance)
    else:
        level_point = np.empty(h)
        prev = origin_level
        for j in range(h):
            prev = prev * np.exp(return_mean[j])
            level_point[j] = prev
    level_lower = origin_level * np.exp(cum_mean + q_lo * sd)
    level_upper = origin_level * np.exp(cum_mean + q_hi * sd)

    timestamps = None
    if isinstance(returns, ReturnSeries):
        timestamps = returns.timestamps[-1] + np.arange(1, h + 1) * HOUR
    return ForecastResult(
        horizon=h,
        return_mean=return_mean,
        return_variance=return_variance,
        level_point=level_point,
        level_lower=level_lower,
        level_upper=level_upper,
        origin_level=origin_level,
        coverage=coverage,
        timestamps=timestamps,
        cumulative_variance=cumulative_variance,
    )
