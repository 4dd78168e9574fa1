"""Return-series statistics for heavy tails, clustering and the variance ordering of prices.

All estimators take a :class:`ReturnSeries` or a plain array of returns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from enum import Enum
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError

__all__ = [
    "ReturnSeries",
    "compute_returns",
    "excess_kurtosis",
    "autocorrelation",
    "HillEstimate",
    "hill_estimator",
    "CvLogResult",
    "cv_log_statistic",
    "VolatilityFlag",
    "ExcessVolatilityResult",
    "excess_volatility_diagnostic",
    "SeriesReport",
    "stylized_facts_report",
    "bartlett_band",
]

MIN_LENGTH = 30
REPORT_MIN_PRICES = 500


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    values: NDArray[np.float64]
    dt: str = "1"

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(v)):
            raise DomainError("returns must be finite")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return int(self.values.size)


def _values(series: ReturnSeries | ArrayLike) -> NDArray[np.float64]:
    if isinstance(series, ReturnSeries):
        return series.values
    return ReturnSeries(series).values


def _need_length(x: NDArray, n: int = MIN_LENGTH) -> None:
    if x.size < n:
        raise DomainError(f"need at least {n} observations, got {x.size}")


def compute_returns(prices: ArrayLike, mode: str = "log") -> ReturnSeries:
    p = np.asarray(prices, dtype=float).ravel()
    if p.size < 2:
        raise DomainError("need at least 2 prices")
    if not np.all(np.isfinite(p)) or np.any(p <= 0):
        raise DomainError("prices must be finite and > 0")
    if mode == "log":
        r = np.log(p[1:] / p[:-1])
    elif mode == "simple":
        r = p[1:] / p[:-1] - 1.0
    else:
        raise DomainError(f"mode must be 'log' or 'simple', got {mode!r}")
    return ReturnSeries(r)


def excess_kurtosis(series: ReturnSeries | ArrayLike) -> float:
    """Fourth standardized sample moment minus 3 (biased moments)."""
    x = _values(series)
    _need_length(x)
    d = x - x.mean()
    m2 = np.mean(d * d)
    if m2 == 0:
        raise DomainError("kurtosis undefined for zero variance")
    return float(np.mean(d**4) / m2**2 - 3.0)


def autocorrelation(series: ReturnSeries | ArrayLike, max_lag: int) -> NDArray[np.float64]:
    """Biased sample ACF for lags ``0..max_lag``; ``acf[0] == 1``."""
    x = _values(series)
    n = x.size
    if max_lag < 1 or max_lag >= n / 4:
        raise DomainError(f"max_lag must be in [1, n/4) for n = {n}, got {max_lag}")
    d = x - x.mean()
    c0 = float(np.dot(d, d))
    if c0 == 0:
        raise DomainError("autocorrelation undefined for zero variance")
    acf = np.empty(max_lag + 1)
    acf[0] = 1.0
    for k in range(1, max_lag + 1):
        acf[k] = np.dot(d[:-k], d[k:]) / c0
    return acf


def bartlett_band(n: int, z: float = 3.0) -> float:
    """White-noise band ``z / sqrt(n)`` for sample autocorrelations."""
    return z / math.sqrt(n)


@dataclass(frozen=True)
class HillEstimate:
    mu: float
    std_error: float
    k: int
    threshold: float

    def ci(self, z: float = 1.96) -> tuple[float, float]:
        return (self.mu - z * self.std_error, self.mu + z * self.std_error)


def hill_estimator(series: ReturnSeries | ArrayLike, k: int) -> HillEstimate:
    """Hill tail-exponent estimate from the ``k`` largest absolute values.

    ``mu = k / sum_{i<=k} ln(x_(i) / x_(k+1))`` with ``x_(1) >= x_(2) >= ...``;
    standard error ``mu / sqrt(k)``.  Zero values are dropped first.  The
    usual working range is ``10 <= k <= n/10``; only ``1 <= k < n`` is enforced.
    """
    x = np.abs(_values(series))
    x = x[x > 0]
    n = x.size
    if not (1 <= k < n):
        raise DomainError(f"k must satisfy 1 <= k < n = {n}, got {k}")
    top = -np.partition(-x, k)[: k + 1]
    top.sort()
    top = top[::-1]
    xk1 = top[k]
    s = float(np.log(top[:k] / xk1).sum())
    if s <= 0:
        raise DomainError(f"all top-{k} order statistics tie with the threshold")
    mu = k / s
    return HillEstimate(mu=mu, std_error=mu / math.sqrt(k), k=int(k), threshold=float(xk1))


@dataclass(frozen=True)
class CvLogResult:
    statistic: float
    n_used: int
    n_zero_excluded: int


def cv_log_statistic(
    series: ReturnSeries | ArrayLike,
    threshold: float | None = None,
    *,
    min_length: int = MIN_LENGTH,
) -> CvLogResult:
    """Coefficient of variation of log-magnitudes, ``std(y) / mean(y)``.

    Without ``threshold``, ``y = ln|x|`` over the non-zero values.  With a
    threshold ``u``, ``y = ln(|x| / u)`` over the tail sample ``|x| > u``; an
    exact power-law tail then gives an exponential ``y`` and a statistic near
    1, while a log-normal tail gives a smaller value.
    """
    x = np.abs(_values(series))
    nz = int(np.sum(x == 0))
    x = x[x > 0]
    if threshold is not None:
        if not (threshold > 0 and math.isfinite(threshold)):
            raise DomainError("threshold must be > 0")
        x = x[x > threshold]
        y = np.log(x / threshold)
    else:
        y = np.log(x)
    _need_length(y, min_length)
    mean = float(y.mean())
    if mean == 0:
        raise DomainError("mean of log-magnitudes is 0; statistic undefined")
    return CvLogResult(statistic=float(y.std() / mean), n_used=int(y.size), n_zero_excluded=nz)


class VolatilityFlag(str, Enum):
    RATIONAL_EXPECTATIONS_CONSISTENT = "RATIONAL_EXPECTATIONS_CONSISTENT"
    EXCESS_VOLATILITY = "EXCESS_VOLATILITY"


@dataclass(frozen=True)
class ExcessVolatilityResult:
    var_p: float
    var_pstar: float
    ordering_flag: VolatilityFlag
    variance_of_diff: float


def excess_volatility_diagnostic(p_series: ArrayLike, pstar_series: ArrayLike) -> ExcessVolatilityResult:
    """Compare the variance of prices with that of fundamental values.

    An optimal forecast is less variable than what it forecasts, so rational
    expectations require ``Var(p) <= Var(p*)``.  The flag reports which side
    of that ordering the data fall on.
    """
    p = np.asarray(p_series, dtype=float).ravel()
    ps = np.asarray(pstar_series, dtype=float).ravel()
    if p.size != ps.size:
        raise DomainError(f"series lengths differ: {p.size} vs {ps.size}")
    _need_length(p)
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(ps))):
        raise DomainError("series must be finite")
    var_p = float(np.var(p, ddof=1))
    var_ps = float(np.var(ps, ddof=1))
    flag = (
        VolatilityFlag.RATIONAL_EXPECTATIONS_CONSISTENT if var_p <= var_ps else VolatilityFlag.EXCESS_VOLATILITY
    )
    return ExcessVolatilityResult(var_p, var_ps, flag, float(np.var(p - ps, ddof=1)))


@dataclass(eq=False)
class SeriesReport:
    """Stylized-facts summary of one return series.

    Field names match the JSON report keys.  ``hill_k`` is always reported
    next to ``hill_mu`` because tail fits depend strongly on the range used.
    """

    mean: float
    std: float
    excess_kurtosis: float
    acf_returns: list[float]
    acf_abs_returns: list[float]
    hill_mu: float
    hill_k: int
    hill_stderr: float
    cv_log: float
    n: int

    @property
    def hill_ci(self) -> tuple[float, float]:
        return (self.hill_mu - 1.96 * self.hill_stderr, self.hill_mu + 1.96 * self.hill_stderr)

    @property
    def band(self) -> float:
        return bartlett_band(self.n)

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SeriesReport":
        names = {f.name for f in fields(cls)}
        if set(d) != names:
            raise DomainError(f"report keys {sorted(d)} do not match {sorted(names)}")
        return cls(**d)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SeriesReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def stylized_facts_report(
    prices: ArrayLike,
    *,
    max_lag: int = 50,
    hill_fraction: float = 0.05,
    mode: str = "log",
) -> SeriesReport:
    """Assemble the return statistics for a price path.

    ``acf_*`` hold lags ``1..max_lag``.  The Hill fit uses the top
    ``hill_fraction`` of absolute returns and the CV statistic is computed on
    that same tail sample.
    """
    p = np.asarray(prices, dtype=float).ravel()
    if p.size < REPORT_MIN_PRICES:
        raise DomainError(f"stylized facts report needs at least {REPORT_MIN_PRICES} prices, got {p.size}")
    r = compute_returns(p, mode).values
    n = r.size
    nonzero = int(np.sum(r != 0))
    k = max(10, int(hill_fraction * nonzero))
    hill = hill_estimator(r, k)
    cv = cv_log_statistic(r, threshold=hill.threshold, min_length=min(MIN_LENGTH, k))
    acf = autocorrelation(r, max_lag)
    acf_abs = autocorrelation(np.abs(r), max_lag)
    return SeriesReport(
        mean=float(r.mean()),
        std=float(r.std(ddof=1)),
        excess_kurtosis=excess_kurtosis(r),
        acf_returns=[float(v) for v in acf[1:]],
        acf_abs_returns=[float(v) for v in acf_abs[1:]],
        hill_mu=hill.mu,
        hill_k=hill.k,
        hill_stderr=hill.std_error,
        cv_log=cv.statistic,
        n=int(n),
    )
