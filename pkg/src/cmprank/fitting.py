"""Maximum-likelihood fits of goal-count series and AIC model comparison.

Three two-parameter families are fitted to a series of per-match goal
counts: CMP, Gaussian (continuous density evaluated at the integer
observations, MLE variance with divisor n) and Negative Binomial (size r,
success probability p, with p profiled out as r / (r + mean)).  All three
have k = 2 free parameters, so ranking by AIC = 2k - 2*loglik and ranking
by log-likelihood coincide.

Fits reduce the data to order-independent sufficient statistics computed on
a sorted copy of the counts, so permuting a series changes no report field,
bit for bit.  The CMP optimizer is a deterministic Nelder-Mead simplex on
(log lambda, log nu), started from the method-of-moments dispersion guess
nu0 = mean / variance and the lambda that matches the sample mean at nu0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.special import gammaln

from .cmpdist import (
    DEFAULT_CONTROL,
    CmpParams,
    InvalidParamsError,
    SeriesControl,
    SeriesNotConvergedError,
    log_normalizer,
    log_pmf,
    mean_and_variance,
)

__all__ = [
    "Family",
    "GoalSeries",
    "GaussianParams",
    "NegBinParams",
    "FitReport",
    "DegenerateSeriesError",
    "SeriesTooShortError",
    "empirical_moments",
    "cmp_log_likelihood",
    "gaussian_log_likelihood",
    "negbin_log_likelihood",
    "fit_cmp",
    "fit_gaussian",
    "fit_negative_binomial",
    "compare_models",
]

# Profile size used when the NegBin MLE diverges (sample variance <= mean);
# NegBin at this size is numerically the Poisson limit.
_NEGBIN_SIZE_CAP = 1e8

_MAX_ITER = 500
_LL_SPREAD_TOL = 1e-9


class Family(str, Enum):
    CMP = "cmp"
    GAUSSIAN = "gaussian"
    NEGATIVE_BINOMIAL = "negative_binomial"


class DegenerateSeriesError(ValueError):
    """No finite MLE exists (zero variance or zero mean)."""


class SeriesTooShortError(ValueError):
    """A goal series needs at least two observations."""


@dataclass(frozen=True)
class GoalSeries:
    """Per-match goal counts for one team and direction (scored or conceded)."""

    counts: tuple[int, ...]
    label: str = ""

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) < 2:
            raise SeriesTooShortError(
                f"need >= 2 observations, got {len(counts)} ({self.label or 'series'})"
            )
        if any(c < 0 for c in counts):
            raise ValueError(f"goal counts must be >= 0 ({self.label or 'series'})")
        object.__setattr__(self, "counts", counts)


@dataclass(frozen=True)
class GaussianParams:
    mean: float
    std: float


@dataclass(frozen=True)
class NegBinParams:
    size: float
    prob: float


@dataclass(frozen=True)
class FitReport:
    """Outcome of one family fit: parameters, likelihood, AIC, diagnostics."""

    family: Family
    params: CmpParams | GaussianParams | NegBinParams | None
    log_likelihood: float
    aic: float
    converged: bool
    iterations: int
    n_obs: int
    sample_mean: float
    n_params: int = 2
    flags: tuple[str, ...] = ()
    error: str | None = None


def _sorted_counts(series: GoalSeries) -> np.ndarray:
    # Sorting fixes the float reduction order, making every fit exactly
    # invariant to the chronological order of the matches.
    return np.sort(np.asarray(series.counts, dtype=np.float64))


def empirical_moments(series: GoalSeries) -> tuple[float, float]:
    """Sample mean and sample variance (divisor n - 1)."""
    xs = _sorted_counts(series)
    mean = float(xs.sum() / len(xs))
    var = float(((xs - mean) ** 2).sum() / (len(xs) - 1))
    return mean, var


def cmp_log_likelihood(
    series: GoalSeries, params: CmpParams, ctrl: SeriesControl = DEFAULT_CONTROL
) -> float:
    xs = _sorted_counts(series)
    return float(log_pmf(xs, params, ctrl).sum())


def gaussian_log_likelihood(series: GoalSeries, params: GaussianParams) -> float:
    xs = _sorted_counts(series)
    var = params.std**2
    return float(
        (-0.5 * np.log(2 * np.pi * var) - (xs - params.mean) ** 2 / (2 * var)).sum()
    )


def negbin_log_likelihood(series: GoalSeries, params: NegBinParams) -> float:
    xs = _sorted_counts(series)
    r, p = params.size, params.prob
    n = len(xs)
    return float(
        gammaln(xs + r).sum()
        - n * gammaln(r)
        - gammaln(xs + 1.0).sum()
        + n * r * math.log(p)
        + xs.sum() * math.log1p(-p)
    )


def _lambda_matching_mean(target: float, nu: float, ctrl: SeriesControl) -> float:
    """Bisect log lambda until the CMP mean matches ``target`` at fixed nu.

    The CMP mean is strictly increasing in lambda, so the bracket is expanded
    geometrically and then bisected; evaluation failures at extreme lambda are
    treated as mean = +inf (the mode, hence the mean, is off the summable
    scale there).
    """

    def mean_at(log_lam: float) -> float:
        try:
            return mean_and_variance(CmpParams(math.exp(log_lam), nu), ctrl)[0]
        except SeriesNotConvergedError:
            return math.inf

    lo = hi = nu * math.log(max(target, 0.05))
    for _ in range(60):
        if mean_at(lo) < target:
            break
        lo -= 2.0
    for _ in range(60):
        if mean_at(hi) > target:
            break
        hi += 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if mean_at(mid) < target:
            lo = mid
        else:
            hi = mid
    return math.exp(0.5 * (lo + hi))


def fit_cmp(series: GoalSeries, ctrl: SeriesControl = DEFAULT_CONTROL) -> FitReport:
    """Maximize the CMP likelihood over the unconstrained (log lam, log nu) plane.

    ``converged`` is True iff the simplex log-likelihood spread dropped below
    1e-9 within 500 iterations; otherwise the best point found is reported.
    """
    xs = _sorted_counts(series)
    n = len(xs)
    mean, var = empirical_moments(series)
    if var == 0 or mean == 0:
        raise DegenerateSeriesError(
            f"cannot fit CMP to a series with mean {mean} and variance {var}"
        )
    sum_x = float(xs.sum())
    sum_log_fact = float(gammaln(xs + 1.0).sum())

    def neg_ll(z: np.ndarray) -> float:
        log_lam, log_nu = float(z[0]), float(z[1])
        if abs(log_lam) > 690 or abs(log_nu) > 690:
            return math.inf
        try:
            log_z = log_normalizer(CmpParams(math.exp(log_lam), math.exp(log_nu)), ctrl)
        except SeriesNotConvergedError:
            return math.inf
        return -(sum_x * log_lam - math.exp(log_nu) * sum_log_fact - n * log_z)

    nu0 = min(max(mean / var, 0.05), 20.0)
    lam0 = _lambda_matching_mean(mean, nu0, ctrl)
    res = minimize(
        neg_ll,
        np.array([math.log(lam0), math.log(nu0)]),
        method="Nelder-Mead",
        options={
            "maxiter": _MAX_ITER,
            "maxfev": 10 * _MAX_ITER,
            "fatol": _LL_SPREAD_TOL,
            "xatol": math.inf,
        },
    )
    params = CmpParams(math.exp(res.x[0]), math.exp(res.x[1]))
    ll = cmp_log_likelihood(series, params, ctrl)
    return FitReport(
        family=Family.CMP,
        params=params,
        log_likelihood=ll,
        aic=4.0 - 2.0 * ll,
        converged=bool(res.success),
        iterations=int(res.nit),
        n_obs=n,
        sample_mean=mean,
    )


def fit_gaussian(series: GoalSeries) -> FitReport:
    """Closed-form Gaussian MLE; density evaluated at the integer counts."""
    xs = _sorted_counts(series)
    n = len(xs)
    mean = float(xs.sum() / n)
    var = float(((xs - mean) ** 2).sum() / n)
    if var == 0:
        raise DegenerateSeriesError("Gaussian MLE variance is zero")
    params = GaussianParams(mean=mean, std=math.sqrt(var))
    ll = gaussian_log_likelihood(series, params)
    return FitReport(
        family=Family.GAUSSIAN,
        params=params,
        log_likelihood=ll,
        aic=4.0 - 2.0 * ll,
        converged=True,
        iterations=0,
        n_obs=n,
        sample_mean=mean,
    )


def fit_negative_binomial(series: GoalSeries) -> FitReport:
    """NegBin MLE via 1-d optimization in log size, p profiled as r/(r+mean).

    When the sample variance does not exceed the mean the size MLE diverges;
    the report then carries the Poisson-limit likelihood at a capped size,
    converged = False and an ``underdispersed`` flag.
    """
    xs = _sorted_counts(series)
    n = len(xs)
    mean, var = empirical_moments(series)
    if var == 0 or mean == 0:
        raise DegenerateSeriesError(
            f"cannot fit NegBin to a series with mean {mean} and variance {var}"
        )
    sum_x = float(xs.sum())
    sum_log_fact = float(gammaln(xs + 1.0).sum())

    def profile_ll(r: float) -> float:
        # log p and log(1-p) written against log(r + mean): no cancellation
        # even at the Poisson-limit sizes.
        log_rm = math.log(r + mean)
        return (
            float(gammaln(xs + r).sum())
            - n * gammaln(r)
            - sum_log_fact
            + n * r * (math.log(r) - log_rm)
            + sum_x * (math.log(mean) - log_rm)
        )

    if var <= mean:
        r_hat = _NEGBIN_SIZE_CAP
        flags = ("underdispersed",)
        converged = False
        iterations = 0
    else:
        res = minimize_scalar(
            lambda t: -profile_ll(math.exp(t)),
            bounds=(math.log(1e-3), math.log(_NEGBIN_SIZE_CAP)),
            method="bounded",
            options={"xatol": 1e-10},
        )
        r_hat = math.exp(res.x)
        flags = ()
        converged = bool(res.success)
        iterations = int(getattr(res, "nit", res.nfev))
        if r_hat > 0.5 * _NEGBIN_SIZE_CAP:
            flags = ("underdispersed",)
            converged = False
    params = NegBinParams(size=r_hat, prob=r_hat / (r_hat + mean))
    ll = negbin_log_likelihood(series, params)
    return FitReport(
        family=Family.NEGATIVE_BINOMIAL,
        params=params,
        log_likelihood=ll,
        aic=4.0 - 2.0 * ll,
        converged=converged,
        iterations=iterations,
        n_obs=n,
        sample_mean=mean,
        flags=flags,
    )


def _failure_report(family: Family, series: GoalSeries, exc: Exception) -> FitReport:
    xs = _sorted_counts(series)
    return FitReport(
        family=family,
        params=None,
        log_likelihood=-math.inf,
        aic=math.inf,
        converged=False,
        iterations=0,
        n_obs=len(xs),
        sample_mean=float(xs.sum() / len(xs)),
        error=str(exc),
    )


def compare_models(
    series: GoalSeries, ctrl: SeriesControl = DEFAULT_CONTROL
) -> list[FitReport]:
    """Fit all three families and return the reports sorted by ascending AIC.

    A family that cannot be fitted contributes a diagnostic entry (params
    None, log-likelihood -inf, ``error`` message) instead of aborting the
    comparison; such entries sort last.
    """
    fitters = [
        (Family.CMP, lambda: fit_cmp(series, ctrl)),
        (Family.GAUSSIAN, lambda: fit_gaussian(series)),
        (Family.NEGATIVE_BINOMIAL, lambda: fit_negative_binomial(series)),
    ]
    reports = []
    for family, fitter in fitters:
        try:
            reports.append(fitter())
        except (DegenerateSeriesError, SeriesNotConvergedError, InvalidParamsError) as exc:
            reports.append(_failure_report(family, series, exc))
    reports.sort(key=lambda r: (r.aic, r.family.value))
    return reports
