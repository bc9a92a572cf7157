import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from loadgarch.errors import DataError
from loadgarch.series import (
    LoadSeries,
    ReturnSeries,
    hourly_index,
    log_returns,
    read_load_csv,
    reconstruct_levels,
    split,
    write_load_csv,
)

positive_levels = arrays(
    float,
    st.integers(2, 200),
    elements=st.floats(1e-3, 1e4, allow_nan=False, allow_infinity=False),
)


def returns_of(values):
    return log_returns(LoadSeries.from_values(values)).values


def test_constant_series_has_zero_returns():
    assert returns_of([50, 50, 50]).tolist() == [0.0, 0.0]


def test_single_step_return():
    assert returns_of([100, 110]) == pytest.approx([0.09531017980432493], abs=1e-15)


def test_day_ahead_first_hour_return():
    # first hour of the day-ahead fixture, evaluated independently with math.log
    assert returns_of([75.83555, 73.99142])[0] == pytest.approx(-0.024618039528942513, abs=1e-15)


def test_return_series_shape_and_origin():
    s = LoadSeries.from_values([10.0, 11.0, 12.1, 13.31])
    r = log_returns(s)
    assert len(r) == len(s) - 1
    assert r.origin_level == 10.0
    assert r.origin_timestamp == s.timestamps[0]
    np.testing.assert_array_equal(r.timestamps, s.timestamps[1:])


def test_non_positive_level_names_index():
    with pytest.raises(DataError, match="index 2"):
        LoadSeries.from_values([1.0, 2.0, 0.0, 3.0])


@pytest.mark.parametrize("values", [[1.0], []])
def test_too_short(values):
    with pytest.raises(DataError):
        LoadSeries.from_values(values)


def test_timestamps_must_increase():
    ts = hourly_index("2020-01-01", 3)[[0, 2, 1]]
    with pytest.raises(DataError, match="strictly increasing"):
        LoadSeries(ts, [1.0, 2.0, 3.0])


def test_values_are_immutable():
    s = LoadSeries.from_values([1.0, 2.0])
    with pytest.raises(ValueError):
        s.values[0] = 5.0


def test_reconstruct_examples():
    flat = ReturnSeries(hourly_index("2020-01-01T01:00", 2), [0.0, 0.0], 100.0)
    assert reconstruct_levels(flat).values.tolist() == [100.0, 100.0, 100.0]
    up = ReturnSeries(hourly_index("2020-01-01T01:00", 1), [math.log(1.1)], 100.0)
    assert reconstruct_levels(up).values == pytest.approx([100.0, 110.0], rel=1e-14)


@given(positive_levels)
def test_round_trip(levels):
    s = LoadSeries.from_values(levels)
    back = reconstruct_levels(log_returns(s))
    np.testing.assert_allclose(back.values, s.values, rtol=1e-12, atol=0)
    np.testing.assert_array_equal(back.timestamps, s.timestamps)


@given(positive_levels, st.floats(1e-3, 1e3))
def test_scale_equivariance(levels, k):
    # the scaled ratio can differ by a couple of roundings, i.e. a few ulp of the return
    r = returns_of(levels)
    np.testing.assert_allclose(returns_of(k * levels), r, rtol=0, atol=1e-15 * (1 + np.abs(r).max()))


@given(positive_levels)
def test_returns_sum_to_total_log_change(levels):
    total = returns_of(levels).sum()
    assert total == pytest.approx(math.log(levels[-1] / levels[0]), abs=1e-10)


def test_split_lengths_and_reconstruction():
    rng = np.random.default_rng(0)
    s = LoadSeries.from_values(70 * np.exp(np.cumsum(0.01 * rng.standard_normal(101))))
    train, test = split(log_returns(s), 24)
    assert (len(train), len(test)) == (76, 24)
    np.testing.assert_allclose(reconstruct_levels(train).values, s.values[:77], rtol=1e-12)
    np.testing.assert_allclose(reconstruct_levels(test).values, s.values[76:], rtol=1e-12)
    np.testing.assert_array_equal(reconstruct_levels(test).timestamps, s.timestamps[76:])


@pytest.mark.parametrize("holdout", [0, 100, -1, 101])
def test_split_rejects_out_of_range(holdout):
    r = log_returns(LoadSeries.from_values(np.linspace(1, 2, 101)))
    with pytest.raises(DataError):
        split(r, holdout)


def test_csv_formats(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("timestamp,load\n11/11/2018 00:00,75.5\n11/11/2018 01:00,74\n")
    s = read_load_csv(p)
    assert s.values.tolist() == [75.5, 74.0]
    assert str(s.timestamps[1]) == "2018-11-11T01:00:00"
    q = tmp_path / "b.csv"
    q.write_text("timestamp,load\n2018-11-11T00:00,75.5\n2018-11-11T01:00:00,74\n")
    np.testing.assert_array_equal(read_load_csv(q).timestamps, s.timestamps)


def test_csv_rejects_gap(tmp_path):
    p = tmp_path / "gap.csv"
    p.write_text("timestamp,load\n2018-11-11 00:00,1\n2018-11-11 01:00,2\n2018-11-11 03:00,3\n")
    with pytest.raises(DataError, match="hourly grid at row 2"):
        read_load_csv(p)


@pytest.mark.parametrize(
    "text",
    [
        "time,load\n2018-01-01 00:00,1\n2018-01-01 01:00,2\n",
        "timestamp,load\nyesterday,1\ntoday,2\n",
        "timestamp,load\n2018-01-01 00:00,1\n2018-01-01 01:00,abc\n",
        "timestamp,load\n2018-01-01 00:00,1\n2018-01-01 01:00,-2\n",
    ],
)
def test_csv_rejects_bad_input(tmp_path, text):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(DataError):
        read_load_csv(p)


def test_csv_write_read_round_trip(tmp_path):
    s = LoadSeries.from_values([70.123456789, 71.5, 69.25], start="2018-11-11T00:00")
    write_load_csv(s, tmp_path / "s.csv")
    back = read_load_csv(tmp_path / "s.csv")
    np.testing.assert_array_equal(back.timestamps, s.timestamps)
    np.testing.assert_allclose(back.values, s.values, rtol=1e-9)


def test_day_ahead_extra_columns(fixtures_dir):
    s, extra = read_load_csv(fixtures_dir / "day_ahead.csv", extra_columns=True)
    assert len(s) == 24
    assert sorted(extra) == ["checked", "proposed"]
