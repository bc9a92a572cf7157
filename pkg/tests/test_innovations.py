import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from loadgarch.errors import ModelError
from loadgarch.innovations import (
    Family,
    InnovationDist,
    cdf,
    density,
    log_density,
    quantile,
    sample,
    skew_normal_location_scale,
)

NORMAL = InnovationDist()
FAMILIES = [InnovationDist(Family.SKEW_NORMAL, shape=a) for a in (-5.0, 0.0, 2.0, 10.0)] + [
    InnovationDist(Family.STUDENT_T, dof=v) for v in (4.0, 8.0, 30.0)
] + [NORMAL]


def moment(dist, k):
    return integrate.quad(lambda x: x**k * density(dist, x), -np.inf, np.inf, epsabs=1e-13, limit=200)[0]


@pytest.mark.parametrize("dist", FAMILIES, ids=str)
def test_standardized_moments(dist):
    assert moment(dist, 0) == pytest.approx(1.0, abs=1e-8)
    assert moment(dist, 1) == pytest.approx(0.0, abs=1e-8)
    assert moment(dist, 2) == pytest.approx(1.0, abs=1e-8)


def test_normal_frozen_values():
    assert log_density(NORMAL, 0.0) == pytest.approx(-0.9189385332046727, abs=1e-15)
    assert quantile(NORMAL, 0.975) == pytest.approx(1.9599639845400536, abs=1e-12)


def test_zero_slant_is_normal():
    x = np.linspace(-6, 6, 1201)
    sn = InnovationDist(Family.SKEW_NORMAL, shape=0.0)
    assert np.max(np.abs(density(sn, x) - density(NORMAL, x))) < 1e-9
    assert np.max(np.abs(cdf(sn, x) - cdf(NORMAL, x))) < 1e-12


@pytest.mark.parametrize("shape", [-5.0, 0.5, 2.0, 10.0])
def test_skew_normal_matches_scipy(shape):
    loc, scale = skew_normal_location_scale(shape)
    d = InnovationDist(Family.SKEW_NORMAL, shape=shape)
    x = np.linspace(-5, 5, 101)
    ref = stats.skewnorm(shape, loc=loc, scale=scale)
    np.testing.assert_allclose(log_density(d, x), ref.logpdf(x), rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(cdf(d, x), ref.cdf(x), atol=1e-10)


@pytest.mark.parametrize("dof", [3.0, 5.0, 30.0])
def test_student_t_matches_scipy(dof):
    scale = math.sqrt((dof - 2) / dof)
    d = InnovationDist(Family.STUDENT_T, dof=dof)
    x = np.linspace(-8, 8, 81)
    np.testing.assert_allclose(log_density(d, x), stats.t(dof, scale=scale).logpdf(x), rtol=1e-12)


def test_student_t_approaches_normal():
    x = np.linspace(-4, 4, 801)
    gaps = [np.max(np.abs(density(InnovationDist(Family.STUDENT_T, dof=v), x) - density(NORMAL, x))) for v in (1e3, 1e4, 1e5)]
    # the gap shrinks like 1/dof
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[1] / gaps[2] == pytest.approx(10, rel=0.05)
    assert gaps[2] < 1e-3


@settings(max_examples=60, deadline=None)
@given(st.floats(-20, 20), st.floats(-6, 6))
def test_skew_reflection(shape, x):
    a = InnovationDist(Family.SKEW_NORMAL, shape=shape)
    b = InnovationDist(Family.SKEW_NORMAL, shape=-shape)
    assert density(a, x) == pytest.approx(density(b, -x), rel=1e-9, abs=1e-300)


@settings(max_examples=40, deadline=None)
@given(st.floats(-10, 10), st.floats(0.001, 0.999))
def test_quantile_inverts_cdf(shape, p):
    d = InnovationDist(Family.SKEW_NORMAL, shape=shape)
    q = quantile(d, p)
    # oracle: integrate the density up to q rather than trusting the closed-form cdf
    mass = integrate.quad(lambda x: density(d, x), -np.inf, q, epsabs=1e-12)[0]
    assert mass == pytest.approx(p, abs=1e-7)


@pytest.mark.parametrize("dist", FAMILIES, ids=str)
def test_cdf_monotone_and_bounded(dist):
    c = cdf(dist, np.linspace(-10, 10, 2001))
    # far-tail values are differences of nearly equal terms, so allow one ulp of jitter
    assert np.all(np.diff(c) >= -1e-16)
    assert c[0] >= 0 and c[-1] <= 1


@pytest.mark.parametrize("dist", FAMILIES, ids=str)
def test_sample_moments(dist):
    z = sample(dist, 200_000, seed=7)
    assert abs(z.mean()) < 0.01
    assert z.var() == pytest.approx(1.0, abs=0.03)


def test_sample_distribution_skew_normal():
    d = InnovationDist(Family.SKEW_NORMAL, shape=4.0)
    z = sample(d, 20_000, seed=3)
    assert stats.kstest(z, lambda x: cdf(d, x)).pvalue > 0.01


def test_sample_reproducible():
    d = InnovationDist(Family.STUDENT_T, dof=5.0)
    np.testing.assert_array_equal(sample(d, 10, 1), sample(d, 10, 1))


def test_validation():
    with pytest.raises(ModelError):
        InnovationDist(Family.STUDENT_T, dof=2.0)
    with pytest.raises(ModelError):
        InnovationDist(Family.SKEW_NORMAL, shape=math.inf)
    with pytest.raises(ModelError):
        log_density(NORMAL, np.nan)
    with pytest.raises(ModelError):
        quantile(NORMAL, 1.0)
    with pytest.raises(ModelError):
        sample(NORMAL, 0, 0)


def test_dict_round_trip():
    for d in FAMILIES:
        assert InnovationDist.from_dict(d.to_dict()) == d
    assert InnovationDist.from_dict("student_t").family is Family.STUDENT_T
    with pytest.raises(ModelError):
        InnovationDist.from_dict({"family": "cauchy"})


def test_free_parameter():
    assert NORMAL.free_parameter is None
    d = InnovationDist(Family.STUDENT_T, dof=5.0)
    assert d.free_parameter == 5.0
    assert d.with_parameter(7.0).dof == 7.0
