"""Multiplicative seasonal ARMA mean equation with a GARCH(1,1) variance.

The mean equation is

    phi(L) Phi(L^s) (1 - L)^d r_t = c + theta(L) Theta(L^s) a_t,
    a_t = eps_t * sigma_t,
    sigma_t^2 = omega + alpha * a_{t-1}^2 + beta * sigma_{t-1}^2,

with sparse lag polynomials (only the listed lags carry coefficients). The
seasonal and nonseasonal factors are multiplied out once into a single
combined AR and MA polynomial, so cross terms such as lag 2 + 24 = 26
appear explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import _recursions
from .errors import DataError, ModelError
from .innovations import Family, InnovationDist, log_density
from .innovations import sample as sample_innovations

MAX_PERSISTENCE = 0.9999


def _lag_tuple(lags, name: str) -> tuple[int, ...]:
    out = []
    for lag in lags:
        if isinstance(lag, bool) or int(lag) != lag or lag < 1:
            raise ModelError(f"{name} must hold positive integers, got {lag!r}")
        out.append(int(lag))
    if len(set(out)) != len(out):
        raise ModelError(f"{name} has duplicate lags: {out}")
    return tuple(sorted(out))


def _multiply_out(nonseasonal: Mapping[int, float], seasonal: Mapping[int, float], sign: float):
    """Expand ``(1 + sign*sum x_i L^i)(1 + sign*sum y_j L^j)``.

    Returns the lag -> coefficient map of the product without its unit
    term, rescaled by ``sign`` so that AR polynomials (sign -1) come back
    as the coefficients ``a_k`` in ``y_t = sum a_k y_{t-k} + ...`` and MA
    polynomials (sign +1) as the coefficients ``m_k`` on ``a_{t-k}``.
    """
    out: dict[int, float] = {}
    for i, x in nonseasonal.items():
        out[i] = out.get(i, 0.0) + x
    for j, y in seasonal.items():
        out[j] = out.get(j, 0.0) + y
    for i, x in nonseasonal.items():
        for j, y in seasonal.items():
            # cross term of the product, already in recursion convention
            out[i + j] = out.get(i + j, 0.0) + sign * x * y
    return dict(sorted(out.items()))


def expand_ar(ar: Mapping[int, float], sar: Mapping[int, float]) -> dict[int, float]:
    """Combined AR coefficients of ``(1 - sum phi_i L^i)(1 - sum Phi_j L^j)``."""
    return _multiply_out(ar, sar, -1.0)


def expand_ma(ma: Mapping[int, float], sma: Mapping[int, float]) -> dict[int, float]:
    """Combined MA coefficients of ``(1 + sum theta_i L^i)(1 + sum Theta_j L^j)``."""
    return _multiply_out(ma, sma, 1.0)


def _as_arrays(poly: Mapping[int, float]) -> tuple[np.ndarray, np.ndarray]:
    lags = np.fromiter(poly.keys(), dtype=np.int64, count=len(poly))
    coefs = np.fromiter(poly.values(), dtype=float, count=len(poly))
    return lags, coefs


def ar_is_stationary(ar_combined: Mapping[int, float]) -> bool:
    """True when all roots of ``1 - sum a_k z^k`` lie outside the unit circle."""
    if not ar_combined or not any(ar_combined.values()):
        return True
    degree = max(ar_combined)
    # roots of the monic lambda^P - sum a_k lambda^(P-k) are the reciprocals of
    # the lag-polynomial roots; the monic form stays well conditioned when the
    # highest-lag coefficient is tiny
    coefs = np.zeros(degree + 1)
    coefs[0] = 1.0
    for k, v in ar_combined.items():
        coefs[k] -= v
    return bool(np.all(np.abs(np.roots(coefs)) < 1.0))


@dataclass(frozen=True)
class ModelSpec:
    """Lag structure, differencing order, GARCH orders and innovation family.

    ``fixed_shape`` pins the innovation's shape parameter (skew-normal slant
    or Student-t dof) instead of estimating it.
    """

    ar_lags: tuple[int, ...] = ()
    ma_lags: tuple[int, ...] = ()
    sar_lags: tuple[int, ...] = ()
    sma_lags: tuple[int, ...] = ()
    season: int = 24
    d: int = 0
    garch_p: int = 1
    garch_q: int = 1
    innovation: Family = Family.NORMAL
    fixed_shape: float | None = None

    def __post_init__(self):
        if int(self.season) != self.season or self.season < 1:
            raise ModelError(f"season must be a positive integer, got {self.season!r}")
        object.__setattr__(self, "season", int(self.season))
        for name in ("ar_lags", "ma_lags", "sar_lags", "sma_lags"):
            object.__setattr__(self, name, _lag_tuple(getattr(self, name), name))
        for name in ("sar_lags", "sma_lags"):
            bad = [lag for lag in getattr(self, name) if lag % self.season]
            if bad:
                raise ModelError(f"{name} must be multiples of season {self.season}: {bad}")
        if self.d not in (0, 1):
            raise ModelError(f"d must be 0 or 1, got {self.d!r}")
        if (self.garch_p, self.garch_q) != (1, 1):
            raise ModelError("only GARCH(1,1) is supported")
        object.__setattr__(self, "innovation", Family(self.innovation))
        if self.fixed_shape is not None:
            if self.innovation is Family.NORMAL:
                raise ModelError("the normal family has no shape parameter to fix")
            # validates the value for the family
            InnovationDist(self.innovation).with_parameter(self.fixed_shape)
            object.__setattr__(self, "fixed_shape", float(self.fixed_shape))

    @property
    def ar_structure(self) -> tuple[int, ...]:
        return tuple(expand_ar(dict.fromkeys(self.ar_lags, 1.0), dict.fromkeys(self.sar_lags, 1.0)))

    @property
    def ma_structure(self) -> tuple[int, ...]:
        return tuple(expand_ma(dict.fromkeys(self.ma_lags, 1.0), dict.fromkeys(self.sma_lags, 1.0)))

    @property
    def max_lag(self) -> int:
        """Largest lag of the combined AR or MA polynomial (0 if none)."""
        return max(self.ar_structure + self.ma_structure, default=0)

    @property
    def estimates_shape(self) -> bool:
        return self.innovation is not Family.NORMAL and self.fixed_shape is None

    @property
    def param_names(self) -> list[str]:
        """Names of the free parameters, in estimation-vector order."""
        names = ["constant"]
        names += [f"ar.{lag}" for lag in self.ar_lags]
        names += [f"sar.{lag}" for lag in self.sar_lags]
        names += [f"ma.{lag}" for lag in self.ma_lags]
        names += [f"sma.{lag}" for lag in self.sma_lags]
        names += ["garch_omega", "garch_alpha", "garch_beta"]
        if self.estimates_shape:
            names.append("dist_shape")
        return names

    @property
    def n_params(self) -> int:
        return len(self.param_names)

    def innovation_dist(self, shape: float | None = None) -> InnovationDist:
        value = self.fixed_shape if self.fixed_shape is not None else shape
        dist = InnovationDist(self.innovation)
        return dist if value is None else dist.with_parameter(value)

    @property
    def label(self) -> str:
        parts = []
        for name, lags in (("AR", self.ar_lags), ("SAR", self.sar_lags),
                           ("MA", self.ma_lags), ("SMA", self.sma_lags)):
            if lags:
                parts.append(f"{name}{{{','.join(map(str, lags))}}}")
        mean = "+".join(parts) or "const"
        return f"{mean} d={self.d} GARCH(1,1) {self.innovation.value}"

    def to_dict(self) -> dict:
        innovation: str | dict = self.innovation.value
        if self.fixed_shape is not None:
            innovation = InnovationDist(self.innovation).with_parameter(self.fixed_shape).to_dict()
        return {
            "ar_lags": list(self.ar_lags),
            "ma_lags": list(self.ma_lags),
            "sar_lags": list(self.sar_lags),
            "sma_lags": list(self.sma_lags),
            "season": self.season,
            "d": self.d,
            "garch_p": self.garch_p,
            "garch_q": self.garch_q,
            "innovation": innovation,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> ModelSpec:
        known = {"ar_lags", "ma_lags", "sar_lags", "sma_lags", "season", "d",
                 "garch_p", "garch_q", "innovation"}
        unknown = set(d) - known
        if unknown:
            raise ModelError(f"unknown model spec fields: {sorted(unknown)}")
        kwargs = {k: d[k] for k in known - {"innovation"} if k in d}
        innov = d.get("innovation", "normal")
        fixed = None
        if isinstance(innov, Mapping):
            dist = InnovationDist.from_dict(innov)
            if dist.family is Family.SKEW_NORMAL and "shape" in innov:
                fixed = dist.shape
            elif dist.family is Family.STUDENT_T and "dof" in innov:
                fixed = dist.dof
            innov = dist.family
        try:
            family = Family(innov)
        except ValueError as exc:
            raise ModelError(f"unknown innovation family {innov!r}") from exc
        return cls(**kwargs, innovation=family, fixed_shape=fixed)


def _lag_map(values, name: str) -> dict[int, float]:
    out = {}
    for k, v in dict(values).items():
        lag = int(k)
        if lag < 1:
            raise ModelError(f"{name} lags must be positive, got {k!r}")
        v = float(v)
        if not math.isfinite(v):
            raise ModelError(f"{name}[{lag}] is not finite")
        out[lag] = v
    return dict(sorted(out.items()))


@dataclass(frozen=True)
class ModelParams:
    """Coefficient values for a :class:`ModelSpec`.

    Lag maps go from lag to coefficient. Construction enforces GARCH
    positivity and covariance stationarity, and stationarity of the
    combined AR polynomial.
    """

    constant: float = 0.0
    ar: Mapping[int, float] = field(default_factory=dict)
    ma: Mapping[int, float] = field(default_factory=dict)
    sar: Mapping[int, float] = field(default_factory=dict)
    sma: Mapping[int, float] = field(default_factory=dict)
    garch_omega: float = 1.0
    garch_alpha: float = 0.0
    garch_beta: float = 0.0
    dist_shape: float | None = None

    __hash__ = None  # lag maps are dicts

    def __post_init__(self):
        for name in ("ar", "ma", "sar", "sma"):
            object.__setattr__(self, name, _lag_map(getattr(self, name), name))
        for name in ("constant", "garch_omega", "garch_alpha", "garch_beta"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ModelError(f"{name} is not finite")
            object.__setattr__(self, name, value)
        if self.dist_shape is not None:
            object.__setattr__(self, "dist_shape", float(self.dist_shape))
        if self.garch_omega <= 0:
            raise ModelError(f"garch_omega must be > 0, got {self.garch_omega}")
        if self.garch_alpha < 0 or self.garch_beta < 0:
            raise ModelError("garch_alpha and garch_beta must be >= 0")
        if self.garch_alpha + self.garch_beta >= 1:
            raise ModelError(
                f"garch_alpha + garch_beta must be < 1, got {self.garch_alpha + self.garch_beta}"
            )
        if not ar_is_stationary(self.ar_combined):
            raise ModelError("AR polynomial has a root on or inside the unit circle")

    @property
    def ar_combined(self) -> dict[int, float]:
        return expand_ar(self.ar, self.sar)

    @property
    def ma_combined(self) -> dict[int, float]:
        return expand_ma(self.ma, self.sma)

    @property
    def persistence(self) -> float:
        return self.garch_alpha + self.garch_beta

    @property
    def unconditional_variance(self) -> float:
        return self.garch_omega / (1.0 - self.persistence)

    @property
    def unconditional_mean(self) -> float:
        """Mean of the (differenced) series implied by the intercept."""
        return self.constant / (1.0 - sum(self.ar_combined.values()))

    def check_spec(self, spec: ModelSpec) -> None:
        """Raise unless the lag maps cover exactly the spec's lags."""
        for name, lags in (("ar", spec.ar_lags), ("ma", spec.ma_lags),
                           ("sar", spec.sar_lags), ("sma", spec.sma_lags)):
            have = tuple(getattr(self, name))
            if have != lags:
                raise ModelError(f"params.{name} lags {have} do not match spec {lags}")
        if spec.estimates_shape and self.dist_shape is None:
            raise ModelError(f"{spec.innovation.value} innovations need dist_shape")

    def innovation_dist(self, spec: ModelSpec) -> InnovationDist:
        return spec.innovation_dist(self.dist_shape)

    def to_vector(self, spec: ModelSpec) -> np.ndarray:
        """Free parameters in :attr:`ModelSpec.param_names` order."""
        self.check_spec(spec)
        vec = [self.constant]
        vec += [self.ar[k] for k in spec.ar_lags]
        vec += [self.sar[k] for k in spec.sar_lags]
        vec += [self.ma[k] for k in spec.ma_lags]
        vec += [self.sma[k] for k in spec.sma_lags]
        vec += [self.garch_omega, self.garch_alpha, self.garch_beta]
        if spec.estimates_shape:
            vec.append(self.dist_shape)
        return np.array(vec, dtype=float)

    @classmethod
    def from_vector(cls, spec: ModelSpec, vec) -> ModelParams:
        it = iter(np.asarray(vec, dtype=float).tolist())
        constant = next(it)
        ar = {k: next(it) for k in spec.ar_lags}
        sar = {k: next(it) for k in spec.sar_lags}
        ma = {k: next(it) for k in spec.ma_lags}
        sma = {k: next(it) for k in spec.sma_lags}
        omega, alpha, beta = next(it), next(it), next(it)
        shape = next(it) if spec.estimates_shape else None
        return cls(constant, ar, ma, sar, sma, omega, alpha, beta, shape)

    def to_dict(self) -> dict:
        def lagmap(m):
            return {str(k): v for k, v in m.items()}

        return {
            "constant": self.constant,
            "ar": lagmap(self.ar),
            "ma": lagmap(self.ma),
            "sar": lagmap(self.sar),
            "sma": lagmap(self.sma),
            "garch_omega": self.garch_omega,
            "garch_alpha": self.garch_alpha,
            "garch_beta": self.garch_beta,
            "dist_shape": self.dist_shape,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> ModelParams:
        try:
            return cls(
                constant=d.get("constant", 0.0),
                ar=d.get("ar", {}),
                ma=d.get("ma", {}),
                sar=d.get("sar", {}),
                sma=d.get("sma", {}),
                garch_omega=d["garch_omega"],
                garch_alpha=d.get("garch_alpha", 0.0),
                garch_beta=d.get("garch_beta", 0.0),
                dist_shape=d.get("dist_shape"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ModelError):
                raise
            raise ModelError(f"malformed params: {exc}") from exc


@dataclass(frozen=True, eq=False)
class Presample:
    """Values of the differenced series and shocks before the sample.

    Both arrays have length ``spec.max_lag`` and run from ``t = -P`` to
    ``t = -1``.
    """

    y: np.ndarray
    a: np.ndarray


@dataclass(frozen=True, eq=False)
class FilterOutput:
    residuals: np.ndarray
    cond_variance: np.ndarray
    std_residuals: np.ndarray

    def __post_init__(self):
        if not (self.residuals.size == self.cond_variance.size == self.std_residuals.size):
            raise ModelError("filter outputs differ in length")
        if not np.all(self.cond_variance > 0):
            raise ModelError("conditional variance must be strictly positive")


def differenced(spec: ModelSpec, returns) -> np.ndarray:
    """The series the ARMA recursion runs on: returns differenced ``d`` times."""
    r = np.asarray(getattr(returns, "values", returns), dtype=float)
    if r.ndim != 1 or not np.all(np.isfinite(r)):
        raise DataError("returns must be a finite 1-d sequence")
    return np.diff(r, n=spec.d) if spec.d else r


def _presample_arrays(spec: ModelSpec, y: np.ndarray, presample: Presample | None):
    p = spec.max_lag
    if presample is None:
        return np.full(p, y.mean()), np.zeros(p)
    pre_y = np.asarray(presample.y, dtype=float)
    pre_a = np.asarray(presample.a, dtype=float)
    if pre_y.shape != (p,) or pre_a.shape != (p,):
        raise ModelError(f"presample arrays must have length {p}")
    return pre_y, pre_a


def _mean_filter_y(spec, params, y, presample=None) -> np.ndarray:
    if y.size < spec.max_lag + 1:
        raise DataError(f"series of length {y.size} is shorter than max lag {spec.max_lag} + 1")
    ar_lags, ar_coefs = _as_arrays(params.ar_combined)
    ma_lags, ma_coefs = _as_arrays(params.ma_combined)
    pre_y, pre_a = _presample_arrays(spec, y, presample)
    return _recursions.arma_residuals(
        y, params.constant, ar_lags, ar_coefs, ma_lags, ma_coefs, pre_y, pre_a
    )


def mean_filter(spec: ModelSpec, params: ModelParams, returns, presample: Presample | None = None) -> np.ndarray:
    """Shocks ``a_t`` of the mean equation.

    Presample values of the differenced series default to its sample mean
    and presample shocks to zero. ``presample`` overrides both, which makes
    the filter an exact inverse of :func:`simulate`.
    """
    params.check_spec(spec)
    return _mean_filter_y(spec, params, differenced(spec, returns), presample)


def variance_filter(params: ModelParams, residuals, initial_variance: float | None = None) -> np.ndarray:
    """GARCH(1,1) conditional variances.

    The first variance is ``initial_variance``, by default the unconditional
    level ``omega / (1 - alpha - beta)``.
    """
    a = np.asarray(residuals, dtype=float)
    if params.garch_omega <= 0 or params.persistence >= 1:
        raise ModelError("GARCH parameters violate omega > 0, alpha + beta < 1")
    s0 = params.unconditional_variance if initial_variance is None else float(initial_variance)
    if not s0 > 0:
        raise ModelError(f"initial variance must be positive, got {s0}")
    return _recursions.garch_variance(a, params.garch_omega, params.garch_alpha, params.garch_beta, s0)


def filter_model(spec, params, returns, presample: Presample | None = None) -> FilterOutput:
    a = mean_filter(spec, params, returns, presample)
    s2 = variance_filter(params, a)
    return FilterOutput(a, s2, a / np.sqrt(s2))


def loglik_terms(dist: InnovationDist, residuals, variances, burn: int) -> float:
    """Sum of ``log f(a_t / sigma_t) - log(sigma_t^2) / 2`` over ``t >= burn``."""
    a = np.asarray(residuals)[burn:]
    s2 = np.asarray(variances)[burn:]
    return float(np.sum(log_density(dist, a / np.sqrt(s2))) - 0.5 * np.sum(np.log(s2)))


def log_likelihood(spec: ModelSpec, params: ModelParams, returns, presample: Presample | None = None) -> float:
    """Conditional log-likelihood, skipping the first ``max_lag`` terms."""
    out = filter_model(spec, params, returns, presample)
    value = loglik_terms(params.innovation_dist(spec), out.residuals, out.cond_variance, spec.max_lag)
    if not math.isfinite(value):
        raise ModelError("log-likelihood is not finite")
    return value


@dataclass(frozen=True, eq=False)
class Simulation:
    """A simulated path with the shocks that generated it.

    ``shocks`` and ``variances`` align with the differenced returns, and
    ``presample`` holds the state just before the window, so
    ``mean_filter(spec, params, returns, presample)`` recovers ``shocks``.
    """

    returns: np.ndarray
    shocks: np.ndarray
    variances: np.ndarray
    innovations: np.ndarray
    presample: Presample


def simulation_burn_in(spec: ModelSpec) -> int:
    return 10 * max(spec.max_lag, 1)


def simulate_path(spec: ModelSpec, params: ModelParams, n: int, seed) -> Simulation:
    params.check_spec(spec)
    burn = simulation_burn_in(spec)
    if n <= spec.max_lag:
        raise ModelError(f"simulation length {n} must exceed max lag {spec.max_lag}")
    total = burn + n
    eps = sample_innovations(params.innovation_dist(spec), total, seed)
    a, s2 = _recursions.garch_generate(
        eps, params.garch_omega, params.garch_alpha, params.garch_beta, params.unconditional_variance
    )
    p = spec.max_lag
    ar_lags, ar_coefs = _as_arrays(params.ar_combined)
    ma_lags, ma_coefs = _as_arrays(params.ma_combined)
    y = _recursions.arma_generate(
        a, params.constant, ar_lags, ar_coefs, ma_lags, ma_coefs,
        np.full(p, params.unconditional_mean), np.zeros(p),
    )
    returns = np.cumsum(y) if spec.d else y
    start = burn + spec.d
    return Simulation(
        returns=returns[burn:],
        shocks=a[start:],
        variances=s2[start:],
        innovations=eps[start:],
        presample=Presample(y[start - p : start].copy(), a[start - p : start].copy()),
    )


def simulate(spec: ModelSpec, params: ModelParams, n: int, seed) -> np.ndarray:
    """``n`` simulated returns after discarding ``10 * max_lag`` burn-in draws."""
    return simulate_path(spec, params, n, seed).returns
