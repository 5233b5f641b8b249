"""
Monte Carlo statistics shared by the experiments.

- empirical survival curves of |F| (or F) with binomial standard errors
- stretched-exponential tail fits, P(|F| >= t) ~ C exp(-c t^alpha)
- jackknife and bootstrap standard errors
- log-log slope fits
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import linregress

from config.settings import (
    BOOTSTRAP_RESAMPLES,
    DEFAULT_QUANTILE_GRID,
    DEFAULT_QUANTILE_POINTS,
    DEFAULT_QUANTILE_RANGE,
    MIN_FIT_POINTS,
    MIN_TAIL_SAMPLES,
    PROFILE_ALPHA_BOUNDS,
)
from src.exceptions import DomainError, FitError
from src.simulation.seeding import SeedSpec, Stream

logger = logging.getLogger(__name__)

FIT_METHODS = ("double_log", "profile")


@dataclass(frozen=True, eq=False)
class TailCurve:
    """
    Empirical survival curve.

    Attributes:
        thresholds: Strictly increasing thresholds t
        survival: P(|F| >= t) per threshold, non-increasing, in [0, 1]
        std_err: Binomial standard errors sqrt(p (1 - p) / N)
        sample_count: Number of samples N (0 for analytic curves)
        label: Name used in CSV rows and plot legends
    """

    thresholds: np.ndarray
    survival: np.ndarray
    std_err: np.ndarray
    sample_count: int
    label: str = ""

    def __post_init__(self):
        thresholds = np.array(self.thresholds, dtype=np.float64).reshape(-1)
        survival = np.array(self.survival, dtype=np.float64).reshape(-1)
        std_err = np.array(self.std_err, dtype=np.float64).reshape(-1)
        if not (thresholds.shape == survival.shape == std_err.shape) or thresholds.size == 0:
            raise DomainError("tail curve needs equally sized, non-empty arrays")
        if np.any(np.diff(thresholds) <= 0):
            raise DomainError("tail curve thresholds must be strictly increasing")
        if np.any(survival < 0) or np.any(survival > 1):
            raise DomainError("tail curve survival must lie in [0, 1]")
        if np.any(np.diff(survival) > 0):
            raise DomainError("tail curve survival must be non-increasing")
        for array in (thresholds, survival, std_err):
            array.setflags(write=False)
        object.__setattr__(self, "thresholds", thresholds)
        object.__setattr__(self, "survival", survival)
        object.__setattr__(self, "std_err", std_err)

    def __len__(self) -> int:
        return self.thresholds.shape[0]

    def to_rows(self) -> List[Dict]:
        return [
            {
                "label": self.label,
                "threshold": float(t),
                "survival": float(s),
                "std_err": float(e),
                "sample_count": int(self.sample_count),
            }
            for t, s, e in zip(self.thresholds, self.survival, self.std_err)
        ]


@dataclass(frozen=True)
class ExponentFit:
    """
    Fitted stretched-exponential tail.

    Attributes:
        alpha_hat: Fitted tail exponent
        c_hat: Fitted rate c in exp(-c t^alpha)
        quantile_range: (q_lo, q_hi) window the points were taken from
        r_squared: Coefficient of determination of the final linear fit
        points_used: Number of curve points in the window
        method: double_log or profile
        prefactor: Fitted C (1.0 for the double-log fit)
    """

    alpha_hat: float
    c_hat: float
    quantile_range: Tuple[float, float]
    r_squared: float
    points_used: int
    method: str = "double_log"
    prefactor: float = 1.0

    def to_dict(self) -> Dict:
        return {
            "alpha_hat": self.alpha_hat,
            "c_hat": self.c_hat,
            "quantile_range": list(self.quantile_range),
            "r_squared": self.r_squared,
            "points_used": self.points_used,
            "method": self.method,
            "prefactor": self.prefactor,
        }


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares line through (log x, log y)."""

    slope: float
    intercept: float
    r_squared: float
    slope_se: float = field(default=float("nan"))

    def to_dict(self) -> Dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "slope_se": self.slope_se,
        }


def _clean_samples(samples, minimum: int) -> np.ndarray:
    values = np.asarray(samples, dtype=np.float64).reshape(-1)
    if values.shape[0] < minimum:
        raise DomainError(f"need at least {minimum} samples, got {values.shape[0]}")
    if not np.all(np.isfinite(values)):
        raise DomainError("samples contain non-finite values")
    return values


def quantile_thresholds(
    magnitudes: np.ndarray,
    quantile_grid: Sequence[float] = DEFAULT_QUANTILE_GRID,
    points: int = DEFAULT_QUANTILE_POINTS,
) -> np.ndarray:
    """
    Thresholds at empirical quantiles, log-spaced in tail mass.

    Tail masses run from 1 - q_lo down to 1 - q_hi; duplicate thresholds
    (ties in the data) are merged.
    """
    q_lo, q_hi = float(quantile_grid[0]), float(quantile_grid[1])
    if not 0.0 <= q_lo < q_hi < 1.0:
        raise DomainError(f"quantile grid must satisfy 0 <= q_lo < q_hi < 1, got ({q_lo}, {q_hi})")
    if points < 2:
        raise DomainError(f"quantile grid needs at least 2 points, got {points}")
    masses = np.geomspace(1.0 - q_lo, 1.0 - q_hi, points)
    return np.unique(np.quantile(magnitudes, 1.0 - masses))


def empirical_tail(
    samples,
    thresholds: Optional[Union[Sequence[float], Dict]] = None,
    label: str = "",
    two_sided: bool = True,
) -> TailCurve:
    """
    Empirical survival function P(|F| >= t).

    Args:
        samples: At least MIN_TAIL_SAMPLES finite reals
        thresholds: Explicit increasing thresholds, or a quantile grid spec
            {"quantile_grid": [q_lo, q_hi], "points": n}; default grid when None
        label: Curve name
        two_sided: Use |F| when True, F itself (upper deviations) when False

    Raises:
        DomainError: If there are too few samples or the thresholds are invalid

    Example:
        >>> curve = empirical_tail(np.random.default_rng(0).standard_normal(100000), [0.0, 1.96])
        >>> curve.survival[0]
        1.0
    """
    values = _clean_samples(samples, MIN_TAIL_SAMPLES)
    magnitudes = np.abs(values) if two_sided else values

    if thresholds is None or isinstance(thresholds, dict):
        spec = thresholds or {}
        grid = quantile_thresholds(
            magnitudes,
            spec.get("quantile_grid", DEFAULT_QUANTILE_GRID),
            int(spec.get("points", DEFAULT_QUANTILE_POINTS)),
        )
    else:
        grid = np.asarray(thresholds, dtype=np.float64).reshape(-1)
        if grid.size == 0 or np.any(np.diff(grid) <= 0) or not np.all(np.isfinite(grid)):
            raise DomainError("explicit thresholds must be finite and strictly increasing")

    ordered = np.sort(magnitudes)
    n = ordered.shape[0]
    exceed = n - np.searchsorted(ordered, grid, side="left")
    survival = exceed / n
    std_err = np.sqrt(survival * (1.0 - survival) / n)

    logger.debug(f"Tail curve '{label}': {len(grid)} thresholds over {n} samples")
    return TailCurve(grid, survival, std_err, n, label)


def reference_tail_curve(k: int, t_grid: Sequence[float]) -> TailCurve:
    """
    Reference curve exp(-t^(2/k)).

    Example:
        >>> reference_tail_curve(2, [0.0, 1.0]).survival
        array([1.        , 0.36787944])
    """
    if k < 1:
        raise DomainError(f"reference level k must be >= 1, got {k}")
    t = np.asarray(t_grid, dtype=np.float64)
    if np.any(t < 0):
        raise DomainError("reference thresholds must be >= 0")
    survival = np.exp(-(t ** (2.0 / k)))
    return TailCurve(t, survival, np.zeros_like(t), 0, f"exp(-t^(2/{k}))")


def _window(curve: TailCurve, quantile_range: Tuple[float, float]):
    q_lo, q_hi = float(quantile_range[0]), float(quantile_range[1])
    if not 0.0 <= q_lo < q_hi < 1.0:
        raise DomainError(f"quantile range must satisfy 0 <= q_lo < q_hi < 1, got ({q_lo}, {q_hi})")
    survival = curve.survival
    mask = (
        (survival >= 1.0 - q_hi)
        & (survival <= 1.0 - q_lo)
        & (survival > 0.0)
        & (survival < 1.0)
        & (curve.thresholds > 0.0)
    )
    points = int(np.count_nonzero(mask))
    if points < MIN_FIT_POINTS:
        raise FitError(
            f"tail fit '{curve.label}' has {points} usable points in quantile range "
            f"({q_lo}, {q_hi}); need {MIN_FIT_POINTS} (degenerate or too small sample?)"
        )
    t = curve.thresholds[mask]
    if np.ptp(t) == 0.0:
        raise FitError(f"tail fit '{curve.label}': thresholds have zero spread")
    return t, survival[mask], (q_lo, q_hi)


def _profile_fit(t: np.ndarray, survival: np.ndarray):
    log_s = np.log(survival)

    def residual(alpha: float) -> float:
        result = linregress(t ** alpha, log_s)
        return float(np.sum((log_s - (result.intercept + result.slope * t ** alpha)) ** 2))

    best = minimize_scalar(residual, bounds=PROFILE_ALPHA_BOUNDS, method="bounded")
    alpha = float(best.x)
    final = linregress(t ** alpha, log_s)
    return alpha, final


def fit_tail_exponent(
    curve: TailCurve,
    quantile_range: Tuple[float, float] = DEFAULT_QUANTILE_RANGE,
    method: str = "double_log",
) -> ExponentFit:
    """
    Fit P(|F| >= t) ~ C exp(-c t^alpha) on the tail window.

    double_log: ordinary least squares of log(-log S) on log t; the slope is
    alpha, exp(intercept) is c and C is taken as 1.
    profile: log S = log C - c t^alpha, linear in (log C, c) for fixed alpha;
    alpha is profiled out with a bounded scalar minimisation.

    Args:
        curve: Empirical (or analytic) survival curve
        quantile_range: Points with survival in [1 - q_hi, 1 - q_lo] are used
        method: double_log or profile

    Raises:
        DomainError: If the quantile range or method is invalid
        FitError: If fewer than MIN_FIT_POINTS usable points remain
    """
    if method not in FIT_METHODS:
        raise DomainError(f"unknown fit method '{method}', expected one of {FIT_METHODS}")
    t, survival, window = _window(curve, quantile_range)

    if method == "double_log":
        result = linregress(np.log(t), np.log(-np.log(survival)))
        alpha, c_hat, prefactor = float(result.slope), float(math.exp(result.intercept)), 1.0
    else:
        alpha, result = _profile_fit(t, survival)
        if not result.slope < 0:
            raise FitError(f"profile fit '{curve.label}' found a non-decaying tail")
        c_hat, prefactor = float(-result.slope), float(math.exp(result.intercept))

    if not (np.isfinite(alpha) and np.isfinite(c_hat)):
        raise FitError(f"tail fit '{curve.label}' produced non-finite estimates")

    fit = ExponentFit(
        alpha_hat=alpha,
        c_hat=c_hat,
        quantile_range=window,
        r_squared=float(result.rvalue ** 2),
        points_used=int(t.shape[0]),
        method=method,
        prefactor=prefactor,
    )
    logger.debug(f"Tail fit '{curve.label}' ({method}): alpha={alpha:.4f} on {fit.points_used} points")
    return fit


def fit_loglog_slope(x: Sequence[float], y: Sequence[float]) -> SlopeFit:
    """
    Fit log y = a + b log x.

    Raises:
        FitError: If fewer than two points or a non-positive value is given
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.shape[0] < 2:
        raise FitError("log-log fit needs at least two paired points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise FitError("log-log fit needs positive values")
    if np.ptp(x) == 0.0:
        raise FitError("log-log fit needs distinct x values")
    if x.shape[0] == 2:
        slope = float(np.diff(np.log(y))[0] / np.diff(np.log(x))[0])
        return SlopeFit(slope, float(np.log(y[0]) - slope * np.log(x[0])), 1.0)
    result = linregress(np.log(x), np.log(y))
    return SlopeFit(float(result.slope), float(result.intercept), float(result.rvalue ** 2), float(result.stderr))


def jackknife_mean_se(values) -> float:
    """
    Delete-one jackknife standard error of a sample mean.

    For the mean this equals the usual std / sqrt(n) (ddof=1).
    """
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    n = values.shape[0]
    if n < 2:
        raise DomainError("jackknife needs at least two values")
    leave_one_out = (values.sum() - values) / (n - 1)
    return float(math.sqrt((n - 1) / n * np.sum((leave_one_out - leave_one_out.mean()) ** 2)))


def bootstrap_se(
    samples,
    statistic: Callable[[np.ndarray], float],
    seed: SeedSpec,
    resamples: int = BOOTSTRAP_RESAMPLES,
) -> float:
    """
    Bootstrap standard error; replicate b draws from substream (BOOTSTRAP, b).
    """
    samples = np.asarray(samples, dtype=np.float64).reshape(-1)
    n = samples.shape[0]
    if resamples < 2:
        raise DomainError(f"bootstrap needs at least two resamples, got {resamples}")
    replicates = np.empty(resamples)
    for b in range(resamples):
        index = seed.generator(b, Stream.BOOTSTRAP).integers(0, n, size=n)
        replicates[b] = statistic(samples[index])
    return float(np.std(replicates, ddof=1))
