"""Standardized innovation distributions: normal, skew-normal, Student-t.

Every family is shifted and scaled to mean 0 and variance 1, so the GARCH
recursion alone carries the scale of the shocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import optimize, special, stats

from .errors import ModelError

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_QUANTILE_XTOL = 1e-12


class Family(str, Enum):
    NORMAL = "normal"
    SKEW_NORMAL = "skew_normal"
    STUDENT_T = "student_t"


@dataclass(frozen=True)
class InnovationDist:
    """An innovation family plus its shape parameter.

    ``shape`` is the skew-normal slant and ``dof`` the Student-t degrees of
    freedom; each is ignored by the other families.
    """

    family: Family = Family.NORMAL
    shape: float = 0.0
    dof: float = 8.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not math.isfinite(self.shape):
            raise ModelError(f"skew-normal shape must be finite, got {self.shape}")
        if self.family is Family.STUDENT_T and not (self.dof > 2 and math.isfinite(self.dof)):
            raise ModelError(f"Student-t needs finite dof > 2, got {self.dof}")

    @property
    def free_parameter(self) -> float | None:
        """The family's shape parameter, or None for the normal."""
        if self.family is Family.SKEW_NORMAL:
            return self.shape
        if self.family is Family.STUDENT_T:
            return self.dof
        return None

    def with_parameter(self, value: float | None) -> InnovationDist:
        if self.family is Family.SKEW_NORMAL:
            return InnovationDist(self.family, shape=float(value))
        if self.family is Family.STUDENT_T:
            return InnovationDist(self.family, dof=float(value))
        return self

    def to_dict(self) -> dict:
        d = {"family": self.family.value}
        if self.family is Family.SKEW_NORMAL:
            d["shape"] = self.shape
        elif self.family is Family.STUDENT_T:
            d["dof"] = self.dof
        return d

    @classmethod
    def from_dict(cls, d) -> InnovationDist:
        if isinstance(d, str):
            return cls(Family(d))
        try:
            family = Family(d["family"])
        except (KeyError, ValueError) as exc:
            raise ModelError(f"bad innovation spec {d!r}") from exc
        return cls(family, shape=float(d.get("shape", 0.0)), dof=float(d.get("dof", 8.0)))


def skew_normal_location_scale(shape: float) -> tuple[float, float]:
    """Location and scale that standardize a skew-normal with slant ``shape``."""
    delta = shape / math.sqrt(1.0 + shape * shape)
    scale = 1.0 / math.sqrt(1.0 - 2.0 * delta * delta / math.pi)
    loc = -scale * delta * math.sqrt(2.0 / math.pi)
    return loc, scale


def _t_scale(dof: float) -> float:
    return math.sqrt((dof - 2.0) / dof)


def log_density(dist: InnovationDist, x):
    """Log of the standardized density; vectorized over ``x``."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ModelError("log_density needs finite arguments")
    if dist.family is Family.NORMAL:
        out = -_LOG_SQRT_2PI - 0.5 * x * x
    elif dist.family is Family.SKEW_NORMAL:
        loc, scale = skew_normal_location_scale(dist.shape)
        z = (x - loc) / scale
        out = math.log(2.0) - math.log(scale) - _LOG_SQRT_2PI - 0.5 * z * z + special.log_ndtr(dist.shape * z)
    else:
        nu = dist.dof
        const = (
            special.gammaln(0.5 * (nu + 1.0))
            - special.gammaln(0.5 * nu)
            - 0.5 * math.log(math.pi * (nu - 2.0))
        )
        out = const - 0.5 * (nu + 1.0) * np.log1p(x * x / (nu - 2.0))
    return out if out.ndim else float(out)


def density(dist: InnovationDist, x):
    return np.exp(log_density(dist, x))


def cdf(dist: InnovationDist, x):
    """Distribution function of the standardized innovation.

    The skew-normal uses the Owen's-T closed form
    ``Phi(z) - 2 T(z, shape)`` of the integrated density.
    """
    x = np.asarray(x, dtype=float)
    if dist.family is Family.NORMAL:
        out = special.ndtr(x)
    elif dist.family is Family.SKEW_NORMAL:
        loc, scale = skew_normal_location_scale(dist.shape)
        z = (x - loc) / scale
        out = special.ndtr(z) - 2.0 * special.owens_t(z, dist.shape)
        out = np.clip(out, 0.0, 1.0)
    else:
        out = stats.t.cdf(x / _t_scale(dist.dof), dist.dof)
    return out if out.ndim else float(out)


def quantile(dist: InnovationDist, p: float) -> float:
    """Inverse CDF. Skew-normal quantiles are found by root bracketing."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ModelError(f"quantile level must lie in (0, 1), got {p}")
    if dist.family is Family.NORMAL:
        return float(special.ndtri(p))
    if dist.family is Family.STUDENT_T:
        return float(stats.t.ppf(p, dist.dof) * _t_scale(dist.dof))
    lo, hi = -1.0, 1.0
    while cdf(dist, lo) > p:
        lo *= 2.0
    while cdf(dist, hi) < p:
        hi *= 2.0
    return float(optimize.brentq(lambda x: cdf(dist, x) - p, lo, hi, xtol=_QUANTILE_XTOL))


def sample(dist: InnovationDist, n: int, seed) -> np.ndarray:
    """Draw ``n`` iid standardized innovations.

    ``seed`` is anything :func:`numpy.random.default_rng` accepts, including
    an existing Generator (which is then advanced).
    """
    if n < 1:
        raise ModelError(f"sample size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    if dist.family is Family.NORMAL:
        return rng.standard_normal(n)
    if dist.family is Family.STUDENT_T:
        return rng.standard_t(dist.dof, n) * _t_scale(dist.dof)
    # two-normal representation: delta*|Z1| + sqrt(1 - delta^2)*Z2 is SN(0, 1, shape)
    delta = dist.shape / math.sqrt(1.0 + dist.shape**2)
    z = rng.standard_normal((2, n))
    raw = delta * np.abs(z[0]) + math.sqrt(1.0 - delta * delta) * z[1]
    loc, scale = skew_normal_location_scale(dist.shape)
    return loc + scale * raw
