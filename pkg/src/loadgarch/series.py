"""Hourly load series, the log-return transform and its inverse.

Timestamps ride along for reporting; every computation indexes by position.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import DataError

HOUR = np.timedelta64(1, "h")

_CSV_FORMATS = ("%m/%d/%Y %H:%M", "ISO8601")


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def hourly_index(start, n: int) -> np.ndarray:
    """Return ``n`` hourly timestamps beginning at ``start``."""
    start = np.datetime64(start, "s")
    return start + np.arange(n) * HOUR


@dataclass(frozen=True, eq=False)
class LoadSeries:
    """Timestamped positive load levels."""

    timestamps: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        ts = _frozen(self.timestamps, "datetime64[s]")
        vals = _frozen(self.values, float)
        if ts.ndim != 1 or vals.ndim != 1 or ts.size != vals.size:
            raise DataError("timestamps and values must be 1-d and of equal length")
        if vals.size < 2:
            raise DataError("a load series needs at least 2 observations")
        if np.any(np.diff(ts) <= np.timedelta64(0, "s")):
            i = int(np.argmax(np.diff(ts) <= np.timedelta64(0, "s"))) + 1
            raise DataError(f"timestamps not strictly increasing at index {i}")
        bad = ~np.isfinite(vals) | (vals <= 0)
        if bad.any():
            i = int(np.argmax(bad))
            raise DataError(f"load level at index {i} is not a positive finite number: {vals[i]!r}")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_values(cls, values, start="2000-01-01T00:00") -> LoadSeries:
        values = np.asarray(values, dtype=float)
        return cls(hourly_index(start, values.size), values)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    """Log-returns of a load series plus the level that precedes them.

    ``origin_timestamp`` is the timestamp of ``origin_level`` so that levels
    can be rebuilt with their full time index.
    """

    timestamps: np.ndarray
    values: np.ndarray
    origin_level: float
    origin_timestamp: np.datetime64 | None = None

    def __post_init__(self):
        ts = _frozen(self.timestamps, "datetime64[s]")
        vals = _frozen(self.values, float)
        if ts.ndim != 1 or vals.ndim != 1 or ts.size != vals.size:
            raise DataError("timestamps and values must be 1-d and of equal length")
        if vals.size < 1:
            raise DataError("a return series needs at least 1 observation")
        if not np.all(np.isfinite(vals)):
            raise DataError("returns must be finite")
        origin = float(self.origin_level)
        if not (np.isfinite(origin) and origin > 0):
            raise DataError(f"origin level must be positive, got {origin!r}")
        if self.origin_timestamp is None:
            origin_ts = ts[0] - HOUR
        else:
            origin_ts = np.datetime64(self.origin_timestamp, "s")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "origin_level", origin)
        object.__setattr__(self, "origin_timestamp", origin_ts)

    def __len__(self) -> int:
        return self.values.size

    @property
    def last_level(self) -> float:
        """Level at the final timestamp, rebuilt from the returns."""
        return float(reconstruct_levels(self).values[-1])


def log_returns(series: LoadSeries) -> ReturnSeries:
    """Log-ratio of consecutive levels: ``r[i] = ln(S[i+1] / S[i])``."""
    s = series.values
    return ReturnSeries(
        timestamps=series.timestamps[1:],
        values=np.log(s[1:] / s[:-1]),
        origin_level=s[0],
        origin_timestamp=series.timestamps[0],
    )


def reconstruct_levels(returns: ReturnSeries) -> LoadSeries:
    """Chain ``S[i+1] = S[i] * exp(r[i])`` forward from the origin level."""
    r = returns.values
    levels = np.empty(r.size + 1)
    levels[0] = returns.origin_level
    growth = np.exp(r)
    for i in range(r.size):
        levels[i + 1] = levels[i] * growth[i]
    ts = np.concatenate([[returns.origin_timestamp], returns.timestamps])
    return LoadSeries(ts, levels)


def split(series: ReturnSeries, holdout: int) -> tuple[ReturnSeries, ReturnSeries]:
    """Split into a training prefix and a ``holdout``-long test suffix.

    The test half's origin is the last training level, so both halves
    reconstruct to the matching slices of the source levels.
    """
    n = len(series)
    if not 0 < holdout < n:
        raise DataError(f"holdout must satisfy 0 < holdout < {n}, got {holdout}")
    cut = n - holdout
    train = ReturnSeries(
        series.timestamps[:cut], series.values[:cut], series.origin_level, series.origin_timestamp
    )
    test = ReturnSeries(
        series.timestamps[cut:], series.values[cut:], train.last_level, series.timestamps[cut - 1]
    )
    return train, test


def _parse_timestamps(raw: pd.Series) -> np.ndarray:
    for fmt in _CSV_FORMATS:
        try:
            parsed = pd.to_datetime(raw, format=fmt)
        except (ValueError, TypeError):
            continue
        return parsed.to_numpy().astype("datetime64[s]")
    raise DataError("timestamps must be 'MM/DD/YYYY HH:MM' or ISO-8601")


def read_load_csv(path, *, extra_columns: bool = False):
    """Read a ``timestamp,load`` CSV into a :class:`LoadSeries`.

    The grid must be complete and hourly; gaps are rejected, not imputed.
    With ``extra_columns=True`` any further numeric columns are returned as
    a dict alongside the series (used for prediction columns in score files).
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype={"timestamp": str})
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataError(f"{path}: cannot parse CSV ({exc})") from exc
    frame.columns = [c.strip() for c in frame.columns]
    if list(frame.columns[:2]) != ["timestamp", "load"]:
        raise DataError(f"{path}: header must start with 'timestamp,load', got {list(frame.columns)}")
    ts = _parse_timestamps(frame["timestamp"].str.strip())
    steps = np.diff(ts)
    if steps.size and np.any(steps != HOUR):
        i = int(np.argmax(steps != HOUR)) + 1
        raise DataError(f"{path}: timestamps are not on a complete hourly grid at row {i}")
    try:
        load = frame["load"].to_numpy(dtype=float)
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric load value ({exc})") from exc
    series = LoadSeries(ts, load)
    if not extra_columns:
        return series
    extras = {}
    for col in frame.columns[2:]:
        try:
            extras[col] = frame[col].to_numpy(dtype=float)
        except ValueError as exc:
            raise DataError(f"{path}: column {col!r} is not numeric") from exc
    return series, extras


def format_timestamp(ts) -> str:
    return str(np.datetime64(ts, "m")).replace("T", " ")


def write_load_csv(series: LoadSeries, path) -> None:
    frame = pd.DataFrame(
        {"timestamp": [format_timestamp(t) for t in series.timestamps], "load": series.values}
    )
    frame.to_csv(path, index=False, float_format="%.10g")
