"""Compiled inner loops for the ARMA and GARCH recursions.

Lag polynomials arrive as parallel (lags, coefs) arrays of the combined,
already-multiplied polynomial. Presample arrays hold the ``P`` values at
``t = -P .. -1`` where ``P`` is the largest combined lag.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def arma_residuals(y, const, ar_lags, ar_coefs, ma_lags, ma_coefs, pre_y, pre_a):
    n = y.size
    p = pre_y.size
    # extended buffers: index p + t holds time t, indices < p hold presample
    ye = np.empty(n + p)
    ae = np.empty(n + p)
    ye[:p] = pre_y
    ae[:p] = pre_a
    ye[p:] = y
    for t in range(p, n + p):
        acc = ye[t] - const
        for j in range(ar_lags.size):
            acc -= ar_coefs[j] * ye[t - ar_lags[j]]
        for j in range(ma_lags.size):
            acc -= ma_coefs[j] * ae[t - ma_lags[j]]
        ae[t] = acc
    return ae[p:].copy()


@njit(cache=True)
def arma_generate(a, const, ar_lags, ar_coefs, ma_lags, ma_coefs, pre_y, pre_a):
    """Invert :func:`arma_residuals`: build ``y`` from the shocks ``a``."""
    n = a.size
    p = pre_y.size
    ye = np.empty(n + p)
    ae = np.empty(n + p)
    ye[:p] = pre_y
    ae[:p] = pre_a
    ae[p:] = a
    for t in range(p, n + p):
        acc = const + ae[t]
        for j in range(ar_lags.size):
            acc += ar_coefs[j] * ye[t - ar_lags[j]]
        for j in range(ma_lags.size):
            acc += ma_coefs[j] * ae[t - ma_lags[j]]
        ye[t] = acc
    return ye[p:].copy()


@njit(cache=True)
def garch_variance(a, omega, alpha, beta, sigma2_0):
    n = a.size
    s2 = np.empty(n)
    s2[0] = sigma2_0
    for t in range(1, n):
        s2[t] = omega + alpha * a[t - 1] * a[t - 1] + beta * s2[t - 1]
    return s2


@njit(cache=True)
def garch_generate(eps, omega, alpha, beta, sigma2_0):
    """Shocks ``a`` and variances from standardized innovations ``eps``."""
    n = eps.size
    a = np.empty(n)
    s2 = np.empty(n)
    s2[0] = sigma2_0
    for t in range(n):
        if t > 0:
            s2[t] = omega + alpha * a[t - 1] * a[t - 1] + beta * s2[t - 1]
        a[t] = eps[t] * np.sqrt(s2[t])
    return a, s2


@njit(cache=True)
def garch_standardize(a, omega, alpha, beta, sigma2_0, burn):
    """Run the variance recursion and return ``(a_t / sigma_t)[burn:]`` and
    ``0.5 * sum(log sigma_t^2)`` over the same range.

    The sum is NaN if any variance is non-positive or non-finite.
    """
    n = a.size
    z = np.empty(n - burn)
    s2 = sigma2_0
    half_log = 0.0
    for t in range(n):
        if t > 0:
            s2 = omega + alpha * a[t - 1] * a[t - 1] + beta * s2
        if not (s2 > 0.0 and s2 < np.inf):
            return z, np.nan
        if t >= burn:
            z[t - burn] = a[t] / np.sqrt(s2)
            half_log += 0.5 * np.log(s2)
    return z, half_log
