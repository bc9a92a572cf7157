"""Maximum-likelihood fitting, standard errors and AIC/BIC model selection.

The optimizer works in an unconstrained coordinate system:

* ``omega = exp(u)``
* ``alpha + beta = 0.9999 * logistic(v1)``, split by ``alpha = (alpha + beta) * logistic(v2)``
* Student-t ``dof = 2 + exp(w)``; everything else is left as is.

so every trial point satisfies the GARCH constraints. Mean coefficients are
unconstrained and the AR polynomial is checked after the fit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize, stats
from scipy.special import expit, logit

from . import _recursions
from .errors import DataError, ModelError, SelectionError
from .innovations import Family, log_density
from .model import (
    MAX_PERSISTENCE,
    FilterOutput,
    ModelParams,
    ModelSpec,
    _as_arrays,
    differenced,
    expand_ar,
    expand_ma,
    filter_model,
)

log = logging.getLogger(__name__)

CONVERGENCE_TOL = 1e-8
MAX_ITER = 20000
HESSIAN_STEP = 1e-4
JITTER = 0.2
_PENALTY = 1e100
_TIE_TOL = 1e-6


class _Likelihood:
    """Log-likelihood of one spec on one series, as a function of a flat vector.

    Skips the validation done by :class:`ModelParams` so the optimizer and
    the Hessian can probe points cheaply, including slightly infeasible
    ones. Returns NaN where the model is undefined.
    """

    def __init__(self, spec: ModelSpec, returns):
        self.spec = spec
        self.y = differenced(spec, returns)
        self.burn = spec.max_lag
        self.pre_y = np.full(self.burn, self.y.mean())
        self.pre_a = np.zeros(self.burn)
        s = spec
        self._slices = {}
        pos = 1
        for name, lags in (("ar", s.ar_lags), ("sar", s.sar_lags), ("ma", s.ma_lags), ("sma", s.sma_lags)):
            self._slices[name] = (pos, lags)
            pos += len(lags)
        self._garch = pos
        self.n_obs = self.y.size - self.burn

    def _lagmap(self, vec, name):
        pos, lags = self._slices[name]
        return dict(zip(lags, vec[pos : pos + len(lags)]))

    def __call__(self, vec) -> float:
        vec = np.asarray(vec, dtype=float)
        ar = expand_ar(self._lagmap(vec, "ar"), self._lagmap(vec, "sar"))
        ma = expand_ma(self._lagmap(vec, "ma"), self._lagmap(vec, "sma"))
        omega, alpha, beta = vec[self._garch : self._garch + 3]
        if omega <= 0 or alpha + beta >= 1:
            return math.nan
        shape = vec[self._garch + 3] if self.spec.estimates_shape else None
        try:
            dist = self.spec.innovation_dist(shape)
        except ModelError:
            return math.nan
        with np.errstate(all="ignore"):
            if ar or ma:
                ar_lags, ar_coefs = _as_arrays(ar)
                ma_lags, ma_coefs = _as_arrays(ma)
                a = _recursions.arma_residuals(
                    self.y, vec[0], ar_lags, ar_coefs, ma_lags, ma_coefs, self.pre_y, self.pre_a
                )
            else:
                a = self.y - vec[0]
            z, half_log_var = _recursions.garch_standardize(
                a, omega, alpha, beta, omega / (1.0 - alpha - beta), self.burn
            )
            if not math.isfinite(half_log_var) or not np.all(np.isfinite(z)):
                return math.nan
            value = float(np.sum(log_density(dist, z))) - half_log_var
        return value if math.isfinite(value) else math.nan

    # --- coordinate maps -------------------------------------------------

    def to_unconstrained(self, vec) -> np.ndarray:
        u = np.array(vec, dtype=float)
        g = self._garch
        omega, alpha, beta = u[g : g + 3]
        total = min(max(alpha + beta, 1e-8), MAX_PERSISTENCE * (1 - 1e-8))
        share = min(max(alpha / (alpha + beta) if alpha + beta > 0 else 0.5, 1e-8), 1 - 1e-8)
        u[g] = math.log(omega)
        u[g + 1] = logit(total / MAX_PERSISTENCE)
        u[g + 2] = logit(share)
        if self.spec.estimates_shape and self.spec.innovation is Family.STUDENT_T:
            u[g + 3] = math.log(u[g + 3] - 2.0)
        return u

    def to_natural(self, u) -> np.ndarray:
        vec = np.array(u, dtype=float)
        g = self._garch
        total = MAX_PERSISTENCE * expit(u[g + 1])
        share = expit(u[g + 2])
        vec[g] = math.exp(min(u[g], 700.0))
        vec[g + 1] = total * share
        vec[g + 2] = total * (1.0 - share)
        if self.spec.estimates_shape and self.spec.innovation is Family.STUDENT_T:
            vec[g + 3] = 2.0 + math.exp(min(u[g + 3], 700.0))
        return vec

    def simplex_steps(self) -> np.ndarray:
        steps = np.full(self.spec.n_params, 0.5)
        steps[0] = 0.05 * max(float(np.std(self.y)), 1e-12)
        steps[1 : self._garch] = 0.1
        return steps


def default_start(spec: ModelSpec, returns) -> ModelParams:
    """Warm start: zero mean coefficients, persistence 0.9, sample moments."""
    y = differenced(spec, returns)
    var = float(np.var(y))
    if var <= 0:
        raise DataError("cannot fit a model to a constant series")
    shape = None
    if spec.estimates_shape:
        shape = 0.0 if spec.innovation is Family.SKEW_NORMAL else 8.0
    return ModelParams(
        constant=float(np.mean(y)),
        ar=dict.fromkeys(spec.ar_lags, 0.0),
        ma=dict.fromkeys(spec.ma_lags, 0.0),
        sar=dict.fromkeys(spec.sar_lags, 0.0),
        sma=dict.fromkeys(spec.sma_lags, 0.0),
        garch_omega=0.1 * var,
        garch_alpha=0.1,
        garch_beta=0.8,
        dist_shape=shape,
    )


def _jitter(spec: ModelSpec, vec: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    out = vec * (1.0 + rng.uniform(-JITTER, JITTER, vec.size))
    g = spec.n_params - 3 - int(spec.estimates_shape)
    if out[g + 1] + out[g + 2] >= MAX_PERSISTENCE:
        out[g + 1 : g + 3] *= 0.99 / (out[g + 1] + out[g + 2])
    if spec.estimates_shape and spec.innovation is Family.STUDENT_T:
        out[-1] = max(out[-1], 2.1)
    return out


@dataclass
class _Run:
    u: np.ndarray
    loglik: float
    iterations: int
    converged: bool


def _simplex_search(objective, u0, steps, max_iter) -> _Run:
    """Repeated Nelder-Mead cycles from the incumbent until a full cycle
    improves the objective by less than ``CONVERGENCE_TOL``."""
    best_u = np.asarray(u0, dtype=float)
    best_f = objective(best_u)
    iterations = 0
    while True:
        simplex = np.vstack([best_u, best_u + np.diag(steps)])
        res = optimize.minimize(
            objective,
            best_u,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "maxiter": max(max_iter - iterations, 1),
                "maxfev": 4 * max_iter,
                "xatol": 1e-5,
                "fatol": 1e-9,
                # dimension-adapted coefficients help beyond a handful of parameters
                "adaptive": best_u.size > 4,
            },
        )
        iterations += int(res.nit)
        improvement = best_f - res.fun
        if res.fun < best_f:
            best_u, best_f = np.asarray(res.x), float(res.fun)
        if improvement < CONVERGENCE_TOL:
            return _Run(best_u, -best_f, iterations, True)
        if iterations >= max_iter:
            return _Run(best_u, -best_f, iterations, False)


def numerical_hessian(func, x, rel_step: float = HESSIAN_STEP) -> np.ndarray:
    """Central-difference Hessian of ``func`` at ``x``.

    Steps are ``rel_step * max(|x_i|, 0.01)`` so that parameters sitting at
    zero still get a usable step.
    """
    x = np.asarray(x, dtype=float)
    k = x.size
    h = rel_step * np.maximum(np.abs(x), 0.01)
    f0 = func(x)
    hess = np.empty((k, k))
    eye = np.eye(k)
    for i in range(k):
        ei = eye[i] * h[i]
        hess[i, i] = (func(x + ei) - 2.0 * f0 + func(x - ei)) / h[i] ** 2
        for j in range(i):
            ej = eye[j] * h[j]
            val = (
                func(x + ei + ej) - func(x + ei - ej) - func(x - ei + ej) + func(x - ei - ej)
            ) / (4.0 * h[i] * h[j])
            hess[i, j] = hess[j, i] = val
    return hess


def _standard_errors(lik: _Likelihood, vec: np.ndarray) -> np.ndarray | None:
    hess = numerical_hessian(lambda v: -lik(v), vec)
    if not np.all(np.isfinite(hess)):
        return None
    try:
        chol = np.linalg.cholesky(hess)
    except np.linalg.LinAlgError:
        return None
    cov = np.linalg.inv(chol).T @ np.linalg.inv(chol)
    return np.sqrt(np.diag(cov))


def information_criteria(loglik: float, k: int, n_obs: int) -> tuple[float, float]:
    """``(AIC, BIC) = (2k - 2 lnL, k ln(n) - 2 lnL)``."""
    return 2.0 * k - 2.0 * loglik, k * math.log(n_obs) - 2.0 * loglik


_MEAN_LABELS = {"ar": "AR", "sar": "SAR", "ma": "MA", "sma": "SMA"}
_VARIANCE_LABELS = {"garch_omega": "Constant", "garch_beta": "GARCH{1}", "garch_alpha": "ARCH{1}"}


def parameter_label(name: str, spec: ModelSpec) -> str:
    """Human-readable row label, e.g. ``ar.2`` -> ``AR {2}``."""
    if name == "constant":
        return "Constant"
    if name in _VARIANCE_LABELS:
        return _VARIANCE_LABELS[name]
    if name == "dist_shape":
        return "Skewness" if spec.innovation is Family.SKEW_NORMAL else "DoF"
    kind, lag = name.split(".")
    return f"{_MEAN_LABELS[kind]} {{{lag}}}"


@dataclass
class FittedModel:
    """Estimated model with inference and fit statistics.

    ``std_errors``, ``t_stats`` and ``p_values`` map parameter names to
    floats, or to None when the Hessian was not positive definite.
    """

    spec: ModelSpec
    params: ModelParams
    std_errors: dict[str, float | None]
    t_stats: dict[str, float | None]
    p_values: dict[str, float | None]
    loglik: float
    aic: float
    bic: float
    n_obs: int
    filter: FilterOutput | None = None
    converged: bool = True
    iterations: int = 0
    warnings: list[str] = field(default_factory=list)

    @property
    def n_params(self) -> int:
        return self.spec.n_params

    def criterion(self, name: str) -> float:
        return {"aic": self.aic, "bic": self.bic}[name.lower()]

    def table_rows(self) -> list[dict]:
        names = self.spec.param_names
        values = self.params.to_vector(self.spec)
        return [
            {
                "parameter": name,
                "label": parameter_label(name, self.spec),
                "value": float(value),
                "std_error": self.std_errors.get(name),
                "t_stat": self.t_stats.get(name),
                "p_value": self.p_values.get(name),
            }
            for name, value in zip(names, values)
        ]

    def tables(self) -> dict[str, list[dict]]:
        mean, variance, dist = [], [], []
        for row in self.table_rows():
            name = row["parameter"]
            if name.startswith("garch_"):
                variance.append(row)
            elif name == "dist_shape":
                dist.append(row)
            else:
                mean.append(row)
        # variance table lists Constant, GARCH{1}, ARCH{1}
        order = {"garch_omega": 0, "garch_beta": 1, "garch_alpha": 2}
        variance.sort(key=lambda r: order[r["parameter"]])
        return {"mean": mean, "variance": variance, "distribution": dist}

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "params": self.params.to_dict(),
            "loglik": self.loglik,
            "aic": self.aic,
            "bic": self.bic,
            "n_obs": self.n_obs,
            "n_params": self.n_params,
            "converged": self.converged,
            "iterations": self.iterations,
            "warning": "; ".join(self.warnings) or None,
            "tables": self.tables(),
        }

    @classmethod
    def from_dict(cls, d: dict, returns=None) -> FittedModel:
        """Rebuild from :meth:`to_dict` output; ``returns`` restores the filter."""
        spec = ModelSpec.from_dict(d["spec"])
        params = ModelParams.from_dict(d["params"])
        params.check_spec(spec)
        rows = [row for table in d.get("tables", {}).values() for row in table]
        se = {r["parameter"]: r.get("std_error") for r in rows}
        ts = {r["parameter"]: r.get("t_stat") for r in rows}
        ps = {r["parameter"]: r.get("p_value") for r in rows}
        filt = filter_model(spec, params, returns) if returns is not None else None
        warning = d.get("warning")
        return cls(
            spec, params, se, ts, ps, float(d["loglik"]), float(d["aic"]), float(d["bic"]),
            int(d["n_obs"]), filt, bool(d.get("converged", True)), int(d.get("iterations", 0)),
            [warning] if warning else [],
        )


def fit(
    spec: ModelSpec,
    returns,
    *,
    start: ModelParams | None = None,
    seed: int = 0,
    restarts: int = 2,
    max_iter: int = MAX_ITER,
) -> FittedModel:
    """Maximum-likelihood fit of ``spec`` to a return series.

    Runs the simplex search from ``start`` (default :func:`default_start`)
    and from ``restarts`` seeded, jittered copies of it, keeping the best
    log-likelihood. Hitting ``max_iter`` does not raise; the result comes
    back with ``converged=False`` and a warning.
    """
    lik = _Likelihood(spec, returns)
    n = lik.y.size
    k = spec.n_params
    if n < 10 * k or n <= 3 * spec.max_lag:
        raise DataError(
            f"{n} observations are too few for {k} parameters and max lag {spec.max_lag}"
        )
    start_params = start if start is not None else default_start(spec, returns)
    x0 = start_params.to_vector(spec)
    if not math.isfinite(lik(x0)):
        raise ModelError("log-likelihood is not finite at the start point")

    def objective(u):
        value = lik(lik.to_natural(u))
        return -value if math.isfinite(value) else _PENALTY

    rng = np.random.default_rng(seed)
    starts = [x0] + [_jitter(spec, x0, rng) for _ in range(restarts)]
    steps = lik.simplex_steps()
    best = None
    for x in starts:
        run = _simplex_search(objective, lik.to_unconstrained(x), steps, max_iter)
        if best is None or run.loglik > best.loglik:
            best = run
    vec = lik.to_natural(best.u)
    loglik = lik(vec)
    try:
        params = ModelParams.from_vector(spec, vec)
    except ModelError as exc:
        raise ModelError(f"fitted parameters are invalid: {exc}") from exc

    warnings = []
    if not best.converged:
        warnings.append(f"optimizer did not converge within {max_iter} iterations")
    se = _standard_errors(lik, vec)
    names = spec.param_names
    if se is None:
        warnings.append("Hessian not positive definite; standard errors unavailable")
        std_errors = t_stats = p_values = dict.fromkeys(names)
    else:
        t = vec / se
        std_errors = dict(zip(names, se.tolist()))
        t_stats = dict(zip(names, t.tolist()))
        p_values = dict(zip(names, (2.0 * stats.norm.sf(np.abs(t))).tolist()))
    for w in warnings:
        log.warning("%s: %s", spec.label, w)

    aic, bic = information_criteria(loglik, k, lik.n_obs)
    return FittedModel(
        spec=spec,
        params=params,
        std_errors=std_errors,
        t_stats=t_stats,
        p_values=p_values,
        loglik=loglik,
        aic=aic,
        bic=bic,
        n_obs=lik.n_obs,
        filter=filter_model(spec, params, returns),
        converged=best.converged,
        iterations=best.iterations,
        warnings=warnings,
    )


@dataclass
class CandidateResult:
    index: int
    spec: ModelSpec
    model: FittedModel | None
    error: str | None = None


def fit_candidates(candidates: Sequence[ModelSpec], returns, *, seed: int = 0, **fit_kwargs) -> list[CandidateResult]:
    """Fit every candidate; candidate ``i`` uses seed ``seed + i``."""
    results = []
    for i, spec in enumerate(candidates):
        try:
            model = fit(spec, returns, seed=seed + i, **fit_kwargs)
        except (ModelError, DataError) as exc:
            results.append(CandidateResult(i, spec, None, str(exc)))
        else:
            results.append(CandidateResult(i, spec, model))
    return results


def best_candidate(results: Sequence[CandidateResult], criterion: str = "bic") -> CandidateResult:
    """Lowest criterion wins; near-ties go to fewer parameters, then list order."""
    criterion = criterion.lower()
    if criterion not in ("aic", "bic"):
        raise ModelError(f"criterion must be 'aic' or 'bic', got {criterion!r}")
    ok = [r for r in results if r.model is not None]
    if not ok:
        raise SelectionError({f"#{r.index} {r.spec.label}": r.error for r in results})
    lowest = min(r.model.criterion(criterion) for r in ok)
    tied = [r for r in ok if r.model.criterion(criterion) <= lowest + _TIE_TOL]
    return min(tied, key=lambda r: (r.model.n_params, r.index))


def select(candidates: Sequence[ModelSpec], returns, criterion: str = "bic", *, seed: int = 0, **fit_kwargs) -> FittedModel:
    """Fit each candidate spec and return the one minimizing AIC or BIC."""
    if not candidates:
        raise ModelError("select needs at least one candidate")
    if criterion.lower() not in ("aic", "bic"):
        raise ModelError(f"criterion must be 'aic' or 'bic', got {criterion!r}")
    return best_candidate(fit_candidates(candidates, returns, seed=seed, **fit_kwargs), criterion).model
