import json

import numpy as np
import pandas as pd
import pytest
from statsmodels.tsa.arima_process import arma2ma

from conftest import SARIMA_SPEC, HOURLY_MEAN, HOURLY_GARCH, HOURLY_GARCH_LONG_RUN
from loadgarch.errors import DataError, ModelError
from loadgarch.estimation import FittedModel
from loadgarch.forecasting import ForecastResult, forecast, psi_weights, variance_path
from loadgarch.model import ModelParams, ModelSpec, filter_model, simulate
from loadgarch.series import LoadSeries, log_returns


def known(spec, params):
    """A fitted-model wrapper around known parameters."""
    return FittedModel(spec, params, {}, {}, {}, 0.0, 0.0, 0.0, 1)


@pytest.fixture(scope="module")
def sarima_model():
    return known(SARIMA_SPEC, ModelParams(**HOURLY_MEAN, **HOURLY_GARCH))


@pytest.fixture(scope="module")
def sarima_returns(sarima_model):
    return simulate(SARIMA_SPEC, sarima_model.params, 600, 21) * 0.01


def test_psi_weights_match_statsmodels():
    p = ModelParams(**HOURLY_MEAN)
    ar = np.zeros(27)
    ar[0] = 1.0
    for k, v in p.ar_combined.items():
        ar[k] -= v
    ma = np.zeros(28)
    ma[0] = 1.0
    for k, v in p.ma_combined.items():
        ma[k] += v
    np.testing.assert_allclose(psi_weights(SARIMA_SPEC, p, 80), arma2ma(ar, ma, 80), atol=1e-13)


def test_variance_path_converges_monotonically():
    p = ModelParams(**HOURLY_GARCH)
    path = variance_path(p, 0.0, 0.0, 200)
    assert np.all(np.diff(path) >= 0) and np.all(np.diff(path[:50]) > 0)
    assert path[-1] == pytest.approx(HOURLY_GARCH_LONG_RUN, abs=1e-10)
    high = variance_path(p, 5.0, 10.0, 200)
    assert np.all(np.diff(high) <= 0) and np.all(np.diff(high[:50]) < 0)


def test_one_step_matches_filter(sarima_model, sarima_returns):
    p = sarima_model.params
    f = forecast(sarima_model, sarima_returns, origin_level=70.0, h=5)
    out = filter_model(SARIMA_SPEC, p, sarima_returns)
    y, a = sarima_returns, out.residuals
    expected = p.constant + sum(c * y[-k] for k, c in p.ar_combined.items()) + sum(
        c * a[-k] for k, c in p.ma_combined.items()
    )
    assert f.return_mean[0] == pytest.approx(expected, abs=1e-14)
    s2 = p.garch_omega + p.garch_alpha * a[-1] ** 2 + p.garch_beta * out.cond_variance[-1]
    assert f.return_variance[0] == pytest.approx(s2, rel=1e-13)
    assert f.level_point[0] == pytest.approx(70.0 * np.exp(expected), rel=1e-14)


def test_bands_positive_and_widening(sarima_model, sarima_returns):
    f = forecast(sarima_model, sarima_returns, origin_level=70.0, h=48)
    assert np.all(f.level_lower > 0)
    assert np.all(f.level_lower < f.level_point) and np.all(f.level_point < f.level_upper)
    log_width = np.log(f.level_upper / f.level_lower)
    assert np.all(np.diff(log_width) >= -1e-12)


def test_level_correction_raises_point(sarima_model, sarima_returns):
    plain = forecast(sarima_model, sarima_returns, origin_level=70.0, h=6)
    corrected = forecast(sarima_model, sarima_returns, origin_level=70.0, h=6, level_correction=True)
    assert np.all(corrected.level_point > plain.level_point)
    np.testing.assert_allclose(plain.level_lower, corrected.level_lower)


def test_differenced_model_mean():
    spec = ModelSpec(ar_lags=[1], d=1)
    p = ModelParams(0.0, {1: 0.5}, garch_omega=1e-4, garch_alpha=0.1, garch_beta=0.8)
    r = simulate(spec, p, 300, 5)
    f = forecast(known(spec, p), r, origin_level=50.0, h=3)
    dy = np.diff(r)
    step = 0.5 * dy[-1]
    assert f.return_mean[0] == pytest.approx(r[-1] + step, abs=1e-14)
    assert f.return_mean[1] == pytest.approx(r[-1] + step + 0.5 * step, abs=1e-14)
    # psi weights of the integrated AR(1) are 1, 1.5, 1.75
    out = filter_model(spec, p, r)
    s2 = variance_path(p, out.residuals[-1], out.cond_variance[-1], 3)
    assert f.return_variance[1] == pytest.approx(1.5**2 * s2[0] + s2[1], rel=1e-12)
    assert f.return_variance[2] == pytest.approx(1.75**2 * s2[0] + 1.5**2 * s2[1] + s2[2], rel=1e-12)


def test_h1_coverage():
    spec = ModelSpec(ar_lags=[1], innovation="skew_normal")
    p = ModelParams(0.0, {1: 0.3}, garch_omega=1e-5, garch_alpha=0.2, garch_beta=0.7, dist_shape=3.0)
    m = known(spec, p)
    hits = 0
    trials = 2000
    for seed in range(trials):
        r = simulate(spec, p, 101, seed)
        f = forecast(m, r[:100], origin_level=1.0, h=1)
        level = np.exp(r[100])
        hits += f.level_lower[0] <= level <= f.level_upper[0]
    assert abs(hits / trials - 0.95) <= 0.03


def test_timestamps_and_outputs(tmp_path, sarima_model):
    s = LoadSeries.from_values(70 * np.exp(np.cumsum(np.full(200, 1e-3))), start="2018-11-10T00:00")
    f = forecast(sarima_model, log_returns(s), h=24)
    assert f.origin_level == pytest.approx(s.values[-1])
    assert str(f.timestamps[0]) == "2018-11-18T08:00:00"
    f.to_csv(tmp_path / "f.csv", actual=np.arange(24.0))
    df = pd.read_csv(tmp_path / "f.csv")
    assert list(df.columns) == ["timestamp", "actual", "level_point", "level_lower", "level_upper"]
    assert df["timestamp"][0] == "2018-11-18 08:00"
    d = json.loads(f.to_json())
    assert d["horizon"] == 24 and len(d["level_point"]) == 24


def test_forecast_validation(sarima_model, sarima_returns):
    with pytest.raises(ModelError):
        forecast(sarima_model, sarima_returns, origin_level=70.0, h=0)
    with pytest.raises(ModelError):
        forecast(sarima_model, sarima_returns, origin_level=70.0, coverage=1.0)
    with pytest.raises(ModelError):
        forecast(sarima_model, sarima_returns)
    with pytest.raises(DataError):
        forecast(sarima_model, sarima_returns, origin_level=-1.0)


def test_result_rejects_inverted_band():
    ones = np.ones(2)
    with pytest.raises(ModelError, match="coverage"):
        ForecastResult(2, ones, ones, ones, ones * 2, ones * 3, 1.0, 0.95)
