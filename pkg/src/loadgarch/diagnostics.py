"""Unit-root and conditional-heteroskedasticity tests.

ADF uses the constant-only regression and interpolates its p-value in the
asymptotic Dickey-Fuller table. Ljung-Box and McLeod-Li are the usual
portmanteau statistics with chi-square reference distributions.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np
from scipy import stats

from .errors import DataError

# Asymptotic quantiles of the Dickey-Fuller t-statistic, constant and no trend
# (Fuller 1976, n = inf row), with two tail anchors at 0.1% and 99.9% taken
# from MacKinnon's (1994) response surface.
_DF_TABLE_STAT = np.array([-4.09, -3.43, -3.12, -2.86, -2.57, -0.44, -0.07, 0.23, 0.60, 2.38])
_DF_TABLE_PROB = np.array([0.001, 0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99, 0.999])

DEFAULT_MCLEOD_LI_LAGS = 20


class TestMethod(str, Enum):
    ADF = "ADF"
    LJUNG_BOX = "LJUNG_BOX"
    MCLEOD_LI = "MCLEOD_LI"

    __test__ = False


@dataclass(frozen=True)
class TestReport:
    method: TestMethod
    statistic: float
    p_value: float
    lags_used: int

    # keeps pytest from collecting this class
    __test__ = False

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p_value out of [0, 1]: {self.p_value}")
        if self.lags_used < 1:
            raise ValueError(f"lags_used must be >= 1, got {self.lags_used}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["method"] = self.method.value
        return d


def _as_series(values) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        raise DataError("expected a 1-d sequence")
    if not np.all(np.isfinite(x)):
        raise DataError("series contains non-finite values")
    return x


def schwert_lags(n: int) -> int:
    """Default ADF lag order ``floor(12 * (n / 100) ** 0.25)``."""
    return int(np.floor(12.0 * (n / 100.0) ** 0.25))


def dickey_fuller_pvalue(statistic: float) -> float:
    """Interpolate the asymptotic DF table; clamp to [0.001, 0.999]."""
    p = np.interp(statistic, _DF_TABLE_STAT, _DF_TABLE_PROB)
    return float(np.clip(p, 0.001, 0.999))


def adf_test(values, lags: int | None = None) -> TestReport:
    """Augmented Dickey-Fuller test with a constant and no trend.

    Regresses ``dy[t]`` on ``1, y[t-1], dy[t-1], ..., dy[t-p]`` and reports the
    t-ratio on ``y[t-1]``. ``lags`` defaults to the Schwert rule.
    """
    y = _as_series(values)
    n = y.size
    p = schwert_lags(n) if lags is None else int(lags)
    if p < 1:
        raise DataError(f"ADF needs at least one augmentation lag, got {p}")
    if n < p + 10:
        raise DataError(f"series of length {n} too short for {p} ADF lags")
    if np.ptp(y) == 0:
        raise DataError("ADF regression is singular on a constant series")

    dy = np.diff(y)
    rows = dy.size - p
    design = np.empty((rows, p + 2))
    design[:, 0] = 1.0
    design[:, 1] = y[p:-1]
    for i in range(1, p + 1):
        design[:, 1 + i] = dy[p - i : dy.size - i]
    target = dy[p:]

    coef, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < design.shape[1]:
        raise DataError("ADF regression is singular")
    resid = target - design @ coef
    dof = rows - design.shape[1]
    if dof <= 0:
        raise DataError("not enough observations for the ADF regression")
    s2 = resid @ resid / dof
    xtx_inv = np.linalg.inv(design.T @ design)
    se = np.sqrt(s2 * xtx_inv[1, 1])
    if se == 0:
        raise DataError("ADF regression is singular")
    stat = float(coef[1] / se)
    return TestReport(TestMethod.ADF, stat, dickey_fuller_pvalue(stat), p)


def autocorrelations(values, lags: int) -> np.ndarray:
    """Sample autocorrelations at lags 1..``lags`` of the demeaned series."""
    x = _as_series(values)
    x = x - x.mean()
    denom = x @ x
    if denom == 0:
        raise DataError("autocorrelations undefined for a zero-variance series")
    return np.array([x[k:] @ x[:-k] / denom for k in range(1, lags + 1)])


def ljung_box_from_acf(acf, n: int) -> tuple[float, float]:
    """Q statistic and chi-square p-value from precomputed autocorrelations."""
    acf = np.asarray(acf, dtype=float)
    m = acf.size
    k = np.arange(1, m + 1)
    q = float(n * (n + 2) * np.sum(acf**2 / (n - k)))
    return q, float(stats.chi2.sf(q, m))


def ljung_box(values, lags: int) -> TestReport:
    x = _as_series(values)
    if not 1 <= lags < x.size:
        raise DataError(f"Ljung-Box needs 1 <= lags < {x.size}, got {lags}")
    q, p = ljung_box_from_acf(autocorrelations(x, lags), x.size)
    return TestReport(TestMethod.LJUNG_BOX, q, p, lags)


def mcleod_li(values, lags: int = DEFAULT_MCLEOD_LI_LAGS) -> TestReport:
    """Ljung-Box on the squared demeaned series (ARCH-effect test)."""
    x = _as_series(values)
    sq = (x - x.mean()) ** 2
    if not np.any(sq):
        raise DataError("McLeod-Li undefined for a zero-variance series")
    report = ljung_box(sq, lags)
    return TestReport(TestMethod.MCLEOD_LI, report.statistic, report.p_value, lags)
