"""Conway-Maxwell-Poisson (CMP) distribution with a numerically robust core.

The CMP pmf is

    P(X = x) = lambda**x / (x!)**nu / Z(lambda, nu),
    Z(lambda, nu) = sum_{j>=0} lambda**j / (j!)**nu,

a two-parameter generalization of the Poisson distribution: nu = 1 recovers
Poisson(lambda), nu = 0 with lambda < 1 the geometric distribution with
success probability 1 - lambda, and nu -> infinity the Bernoulli with
parameter lambda / (1 + lambda).  nu < 1 gives over-dispersion (variance
above the mean), nu > 1 under-dispersion.

Z has no closed form in general and its terms overflow float64 almost
immediately at sports-count scales (lambda in the hundreds), so everything
here runs in log space: terms are accumulated with a streaming, rescaled
log-sum-exp and truncated once the term index has passed the series mode
(~ lambda**(1/nu)) and the current term has dropped below ``rel_tol`` times
the running sum.  When the mode is so large that summing from j = 0 would be
wasteful, the scan starts inside the support window that carries all mass
above ``rel_tol`` (the skipped left tail is provably negligible: below the
mode the log-terms decay faster than the Gaussian profile at the mode).

All functions are pure; samplers derive their state from the seed argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

__all__ = [
    "CmpParams",
    "SeriesControl",
    "DEFAULT_CONTROL",
    "InvalidParamsError",
    "SeriesNotConvergedError",
    "NonPositiveVarianceError",
    "log_normalizer",
    "log_pmf",
    "pmf",
    "mean_and_variance",
    "sample",
    "dispersion_index",
    "classify_dispersion",
]

_CHUNK_START = 256
_CHUNK_MAX = 65536
# Sum from j = 0 unless the window start would skip at least this many terms.
_WINDOW_MIN_START = 1024


class InvalidParamsError(ValueError):
    """Raised when a (lambda, nu) pair violates the CMP parameter domain."""


class SeriesNotConvergedError(RuntimeError):
    """Raised when the normalizing series hits ``max_terms`` before the
    truncation rule fires."""


class NonPositiveVarianceError(ValueError):
    """Raised when a dispersion index is requested for variance <= 0."""


@dataclass(frozen=True)
class CmpParams:
    """CMP parameter pair: location-like ``lam`` > 0 and dispersion ``nu`` >= 0.

    nu = 0 requires lam < 1, otherwise the normalizing series diverges.
    """

    lam: float
    nu: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise InvalidParamsError(f"lambda must be finite and > 0, got {self.lam}")
        if not (math.isfinite(self.nu) and self.nu >= 0):
            raise InvalidParamsError(f"nu must be finite and >= 0, got {self.nu}")
        if self.nu == 0 and self.lam >= 1:
            raise InvalidParamsError(
                f"nu = 0 requires lambda < 1 (series diverges), got lambda = {self.lam}"
            )


@dataclass(frozen=True)
class SeriesControl:
    """Truncation control for the normalizing series.

    ``rel_tol`` bounds the relative truncation error on Z under the stopping
    rule; ``max_terms`` caps the number of summed terms.
    """

    rel_tol: float = 1e-12
    max_terms: int = 100_000

    def __post_init__(self):
        if not (0 < self.rel_tol < 1):
            raise InvalidParamsError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if self.max_terms < 1000:
            raise InvalidParamsError(f"max_terms must be >= 1000, got {self.max_terms}")


DEFAULT_CONTROL = SeriesControl()


def _mode_estimate(lam: float, nu: float) -> float:
    """Approximate index of the largest series term, lambda**(1/nu)."""
    if nu == 0:
        return 0.0
    log_mode = math.log(lam) / nu
    if log_mode > 700:
        return math.inf
    return math.exp(log_mode)


def _window_start(mode: float, nu: float, rel_tol: float) -> int:
    """First index of the scan window.

    Returns 0 unless the mode sits far out; then the left tail below the
    returned index holds less than ~rel_tol * exp(-16) of the total mass.
    """
    if not math.isfinite(mode) or mode <= _WINDOW_MIN_START or nu <= 0:
        return 0
    slack = -math.log(rel_tol) + math.log(mode) + 16.0
    width = math.sqrt(2.0 * mode * slack / nu) + 4.0
    start = mode - width
    if start <= _WINDOW_MIN_START:
        return 0
    return int(start)


class _ScanResult:
    __slots__ = ("log_z", "j_lo", "n_terms", "log_terms", "shift", "s0", "s1", "s2")

    def __init__(self, log_z, j_lo, n_terms, log_terms, shift, s0, s1, s2):
        self.log_z = log_z
        self.j_lo = j_lo
        self.n_terms = n_terms
        self.log_terms = log_terms
        self.shift = shift
        self.s0 = s0
        self.s1 = s1
        self.s2 = s2


def _scan(
    params: CmpParams,
    ctrl: SeriesControl,
    want_moments: bool = False,
    want_terms: bool = False,
) -> _ScanResult:
    """Sum the normalizing series in log space with streaming rescaling.

    Stops at the first chunk boundary j with j > mode and
    log t_j < log(rel_tol) + log(sum so far); past the mode the terms
    decrease while the running sum grows, so checking at boundaries fires at
    most one chunk later than a term-by-term check and only adds accuracy.
    """
    lam, nu = params.lam, params.nu
    log_lam = math.log(lam)
    log_tol = math.log(ctrl.rel_tol)
    mode = _mode_estimate(lam, nu)
    j_lo = _window_start(mode, nu, ctrl.rel_tol)
    shift = int(min(max(mode, 0.0), 4e15)) if want_moments else 0

    scale = -math.inf
    s0 = s1 = s2 = 0.0
    chunks: list[np.ndarray] = [] if want_terms else None
    j = j_lo
    n_terms = 0
    size = _CHUNK_START
    while True:
        hi = min(j + size, j_lo + ctrl.max_terms)
        js = np.arange(j, hi, dtype=np.float64)
        log_t = js * log_lam - nu * gammaln(js + 1.0)
        top = float(log_t.max())
        if top > scale:
            rescale = math.exp(scale - top)  # exp(-inf) == 0 on first chunk
            s0 *= rescale
            s1 *= rescale
            s2 *= rescale
            scale = top
        weights = np.exp(log_t - scale)
        s0 += float(weights.sum())
        if want_moments:
            offset = js - shift
            s1 += float((weights * offset).sum())
            s2 += float((weights * offset * offset).sum())
        if want_terms:
            chunks.append(log_t)
        n_terms += len(js)
        j = hi
        log_sum = scale + math.log(s0)
        if js[-1] > mode and log_t[-1] < log_tol + log_sum:
            break
        if n_terms >= ctrl.max_terms:
            raise SeriesNotConvergedError(
                f"series for lambda={lam}, nu={nu} did not converge within "
                f"{ctrl.max_terms} terms (mode ~ {mode:.3g})"
            )
        size = min(size * 2, _CHUNK_MAX)

    log_terms = np.concatenate(chunks) if want_terms else None
    return _ScanResult(log_sum, j_lo, n_terms, log_terms, shift, s0, s1, s2)


def log_normalizer(params: CmpParams, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """log Z(lambda, nu), the log of the CMP normalizing series."""
    return _scan(params, ctrl).log_z


def log_pmf(x, params: CmpParams, ctrl: SeriesControl = DEFAULT_CONTROL):
    """Log pmf at ``x`` (scalar or array of non-negative integers).

    The normalizer is evaluated once per call, so array arguments are the
    cheap way to tabulate the distribution.
    """
    xs = np.asarray(x, dtype=np.float64)
    if xs.size and (np.any(xs < 0) or np.any(xs != np.floor(xs))):
        raise ValueError("x must contain non-negative integers")
    log_z = log_normalizer(params, ctrl)
    out = xs * math.log(params.lam) - params.nu * gammaln(xs + 1.0) - log_z
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out)
    return out


def pmf(x, params: CmpParams, ctrl: SeriesControl = DEFAULT_CONTROL):
    """Pmf at ``x``; see :func:`log_pmf`."""
    return np.exp(log_pmf(x, params, ctrl))


def mean_and_variance(
    params: CmpParams, ctrl: SeriesControl = DEFAULT_CONTROL
) -> tuple[float, float]:
    """(E[X], V[X]) by series summation under the same truncation rule.

    Moments are accumulated around the series mode to avoid the catastrophic
    cancellation of E[X^2] - E[X]^2 when the mean is large.
    """
    res = _scan(params, ctrl, want_moments=True)
    m1 = res.s1 / res.s0
    m2 = res.s2 / res.s0
    mean = res.shift + m1
    variance = m2 - m1 * m1
    return mean, variance


def sample(
    params: CmpParams,
    n: int,
    seed: int,
    ctrl: SeriesControl = DEFAULT_CONTROL,
) -> np.ndarray:
    """Draw ``n`` values by inversion of the cumulative pmf.

    Deterministic given ``seed``; the pmf table is tabulated over the same
    truncated support the normalizer uses.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    res = _scan(params, ctrl, want_terms=True)
    cdf = np.cumsum(np.exp(res.log_terms - res.log_z))
    u = np.random.default_rng(seed).random(n)
    idx = np.searchsorted(cdf, u, side="right")
    idx = np.minimum(idx, len(cdf) - 1)
    return (res.j_lo + idx).astype(np.int64)


def dispersion_index(mean: float, variance: float) -> float:
    """Dispersion index mean / variance.

    Values below 1 signal over-dispersion, above 1 under-dispersion.
    """
    if not (variance > 0):
        raise NonPositiveVarianceError(f"variance must be > 0, got {variance}")
    return mean / variance


def classify_dispersion(di: float) -> str:
    """Text label for a dispersion index: over-, under- or equi-dispersion."""
    if di < 1:
        return "over-dispersion"
    if di > 1:
        return "under-dispersion"
    return "equi-dispersion"
