"""
Concentration Lab

Monte Carlo experiments on signature coordinates of Gaussian processes:

- second/fourth moments of coordinates against closed forms
- tail curves and stretched-exponential exponent fits (level k -> 2/k)
- hypercontractive moment ratios ||F||_p / ||F||_2 <= (p-1)^{k/2}
- small-ball probabilities P(|F| <= eps ||F||_2) against C_k eps^{1/k}
- weighted-norm mean concentration of signature / log-signature features
- Lipschitz growth of the truncated logarithm on weighted balls
- fBm self-similarity scaling, OU area refinement, weighted-norm tails

Every experiment takes a SeedSpec; draws come from documented substreams
(see src/simulation/seeding.py), so results are reproducible for any
worker count.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from config.settings import (
    BCH_REJECTION_CAP,
    BOOTSTRAP_RESAMPLES,
    DEFAULT_CHUNK_SIZE,
    DEFAULT_QUANTILE_RANGE,
    MIN_BCH_PAIRS,
    MIN_HYPER_SAMPLES,
    MIN_MOMENT_SAMPLES,
    SMALL_BALL_CONSTANT_PER_LEVEL,
    TAIL_EXPONENT_TOLERANCE,
)
from src.algebra.lie_algebra import lyndon_basis
from src.algebra.tensor_algebra import (
    WeightScheme,
    exp_coords,
    format_word,
    log_coords,
    parse_word,
    weighted_norm_coords,
)
from src.exceptions import DomainError, SamplingError
from src.signature.signature_engine import Path, path_signature
from src.simulation.gaussian_simulator import GaussianModel, ModelKind, OUStart, SampleGrid, covariance
from src.simulation.seeding import SeedSpec, Stream
from .feature_pipeline import (
    FeatureKind,
    coordinate_samples,
    feature_dimension,
    feature_sums,
    features_to_tensor,
    levy_area_samples,
    simulate_features,
)
from .statistics import (
    ExponentFit,
    SlopeFit,
    TailCurve,
    bootstrap_se,
    empirical_tail,
    fit_loglog_slope,
    fit_tail_exponent,
    jackknife_mean_se,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Result types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VarianceReport:
    """
    Moments of one signature coordinate S_I.

    Attributes:
        word: Multi-index I
        second_moment: Sample mean of S_I^2
        second_moment_se: Jackknife standard error
        fourth_moment: Sample mean of S_I^4
        fourth_moment_se: Jackknife standard error
        reference: Analytic E[S_I^2] when known
        reference_label: Provenance of the reference
        n_steps: Grid resolution
        horizon: Final time T
        sample_count: Number of paths
        model: Model label
    """

    word: tuple
    second_moment: float
    second_moment_se: float
    fourth_moment: float
    fourth_moment_se: float
    reference: Optional[float]
    reference_label: Optional[str]
    n_steps: int
    horizon: float
    sample_count: int
    model: str

    def __post_init__(self):
        if self.second_moment < 0 or self.fourth_moment < 0:
            raise DomainError("moments of squares must be non-negative")
        if not self.second_moment_se > 0:
            raise DomainError(f"degenerate samples for S_{format_word(self.word)}: zero standard error")

    def to_dict(self) -> Dict:
        return {
            "word": format_word(self.word),
            "second_moment": self.second_moment,
            "second_moment_se": self.second_moment_se,
            "fourth_moment": self.fourth_moment,
            "fourth_moment_se": self.fourth_moment_se,
            "reference": self.reference,
            "reference_label": self.reference_label,
            "n_steps": self.n_steps,
            "horizon": self.horizon,
            "sample_count": self.sample_count,
            "model": self.model,
        }


@dataclass(frozen=True)
class MomentRatio:
    """Empirical ||F||_p / ||F||_2 against the bound (p-1)^{k/2}."""

    p: float
    k: int
    ratio: float
    std_err: float
    bound: float
    passed: bool

    @property
    def relative_se(self) -> float:
        return self.std_err / self.ratio

    def to_dict(self) -> Dict:
        return {
            "p": self.p,
            "k": self.k,
            "ratio": self.ratio,
            "std_err": self.std_err,
            "bound": self.bound,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class SmallBallPoint:
    epsilon: float
    probability: float
    std_err: float
    bound: float
    passed: bool

    def to_dict(self) -> Dict:
        return {
            "epsilon": self.epsilon,
            "probability": self.probability,
            "std_err": self.std_err,
            "bound": self.bound,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class SmallBallTable:
    """Empirical small-ball probabilities P(|F| <= eps * sigma_hat)."""

    k: int
    sigma_hat: float
    constant: float
    points: List[SmallBallPoint]
    sample_count: int

    @property
    def passed(self) -> bool:
        return all(point.passed for point in self.points)

    def to_dict(self) -> Dict:
        return {
            "k": self.k,
            "sigma_hat": self.sigma_hat,
            "constant": self.constant,
            "sample_count": self.sample_count,
            "pass": self.passed,
            "points": [point.to_dict() for point in self.points],
        }


@dataclass(frozen=True)
class MeanDeviationCurve:
    """
    ||mu_hat_n - mu_ref||_w as a function of n.

    Attributes:
        n_values: Strictly increasing sample sizes
        deviations: Mean deviation over repetitions, per n
        deviation_se: Standard error of each mean deviation
        slope: Log-log fit of deviations against n
        weights: Weight scheme of the norm
        feature: signature or log-signature
        feature_dimension: d_m, number of feature coordinates
        reference_count: Paths in the reference mean
        reference_error: ||SE of mu_ref||_w, the reference's own MC error
        reps: Repetitions per n
    """

    n_values: np.ndarray
    deviations: np.ndarray
    deviation_se: np.ndarray
    slope: SlopeFit
    weights: WeightScheme
    feature: FeatureKind
    feature_dimension: int
    reference_count: int
    reference_error: float
    reps: int

    def __post_init__(self):
        if np.any(np.diff(self.n_values) <= 0):
            raise DomainError("n_values must be strictly increasing")
        if np.any(self.deviations <= 0):
            raise DomainError("deviations must be positive")

    @property
    def slope_hat(self) -> float:
        return self.slope.slope

    def to_dict(self) -> Dict:
        return {
            "n_values": [int(n) for n in self.n_values],
            "deviations": [float(x) for x in self.deviations],
            "deviation_se": [float(x) for x in self.deviation_se],
            "slope_hat": self.slope.slope,
            "fit": self.slope.to_dict(),
            "weights": self.weights.to_dict(),
            "feature": self.feature.value,
            "feature_dimension": self.feature_dimension,
            "reference_count": self.reference_count,
            "reference_error": self.reference_error,
            "reps": self.reps,
        }


@dataclass(frozen=True)
class ProbeRadius:
    radius: float
    max_ratio: float
    mean_ratio: float
    pairs_used: int
    pairs_skipped: int

    def to_dict(self) -> Dict:
        return {
            "radius": self.radius,
            "max_ratio": self.max_ratio,
            "mean_ratio": self.mean_ratio,
            "pairs_used": self.pairs_used,
            "pairs_skipped": self.pairs_skipped,
        }


@dataclass(frozen=True)
class BCHProbeReport:
    """Max ratio ||Log x - Log y||_w / ||x - y||_w per radius, and its growth."""

    d: int
    m: int
    radii: List[ProbeRadius]
    slope: Optional[SlopeFit]
    slope_bound: float

    @property
    def passed(self) -> bool:
        return self.slope is None or self.slope.slope <= self.slope_bound

    def to_dict(self) -> Dict:
        return {
            "d": self.d,
            "m": self.m,
            "radii": [r.to_dict() for r in self.radii],
            "slope": None if self.slope is None else self.slope.to_dict(),
            "slope_bound": self.slope_bound,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class TailReport:
    """A tail curve with its exponent fit and expected exponent 2/k."""

    curve: TailCurve
    fit: ExponentFit
    k: int
    expected_alpha: float
    expected_range: tuple

    @property
    def in_range(self) -> bool:
        return self.expected_range[0] <= self.fit.alpha_hat <= self.expected_range[1]

    def to_dict(self) -> Dict:
        return {
            "label": self.curve.label,
            "k": self.k,
            "expected_alpha": self.expected_alpha,
            "expected_range": list(self.expected_range),
            "fit": self.fit.to_dict(),
            "sample_count": self.curve.sample_count,
        }


@dataclass(frozen=True)
class ScalingReport:
    """Second moment of S_I over several horizons; exponent 2 k H expected."""

    word: tuple
    horizons: List[float]
    moments: List[float]
    moment_se: List[float]
    expected_exponent: float
    slope: SlopeFit
    ratio: Optional[float] = None
    ratio_se: Optional[float] = None
    expected_ratio: Optional[float] = None

    def to_dict(self) -> Dict:
        return {
            "word": format_word(self.word),
            "horizons": list(self.horizons),
            "moments": list(self.moments),
            "moment_se": list(self.moment_se),
            "expected_exponent": self.expected_exponent,
            "fit": self.slope.to_dict(),
            "ratio": self.ratio,
            "ratio_se": self.ratio_se,
            "expected_ratio": self.expected_ratio,
        }


@dataclass(frozen=True)
class OUAreaReport:
    """
    OU Lévy area second moment with grid-refinement reference.

    Attributes:
        empirical / empirical_se: E[A^2] on the fixture grid
        refinement: {n_steps: (estimate, se)} for the refinement grids
        extrapolated / extrapolated_se: Richardson extrapolation in the step size
        published: Closed form as published, evaluated at theta
        derived: Ito-isometry closed form for the configured start
    """

    theta: float
    horizon: float
    start: str
    n_steps: int
    empirical: float
    empirical_se: float
    refinement: Dict[int, tuple]
    extrapolated: float
    extrapolated_se: float
    published: float
    derived: float
    sample_count: int

    @property
    def combined_se(self) -> float:
        return math.hypot(self.empirical_se, self.extrapolated_se)

    def to_dict(self) -> Dict:
        return {
            "theta": self.theta,
            "horizon": self.horizon,
            "start": self.start,
            "n_steps": self.n_steps,
            "empirical": self.empirical,
            "empirical_se": self.empirical_se,
            "refinement": {str(n): {"estimate": e, "se": s} for n, (e, s) in sorted(self.refinement.items())},
            "extrapolated": self.extrapolated,
            "extrapolated_se": self.extrapolated_se,
            "published_closed_form": self.published,
            "derived_closed_form": self.derived,
            "sample_count": self.sample_count,
        }


# ---------------------------------------------------------------------------
# Coordinates and moments
# ---------------------------------------------------------------------------

def _as_word(word) -> tuple:
    word = parse_word(word)
    if not word:
        raise DomainError("word must be non-empty")
    return word


def levy_area(p: Path, i: int = 1, j: int = 2) -> float:
    """
    Lévy area A^{i,j} = (S_ij - S_ji) / 2 of a path.

    Raises:
        DomainError: If i == j or a letter is outside 1..d

    Example:
        >>> levy_area(Path([0, 1, 2], [[0, 0], [1, 0], [1, 1]]))
        0.5
    """
    if i == j:
        raise DomainError(f"Lévy area needs distinct letters, got i = j = {i}")
    if not (1 <= i <= p.d and 1 <= j <= p.d):
        raise DomainError(f"Lévy area letters must lie in 1..{p.d}, got ({i}, {j})")
    sig = path_signature(p, 2)
    return 0.5 * (sig.coefficient((i, j)) - sig.coefficient((j, i)))


def analytic_second_moment(model: GaussianModel, word, horizon: float):
    """
    Closed-form E[S_I(X)^2] on [0, T] where one is known.

    Returns:
        (value, provenance label), or (None, None)
    """
    word = _as_word(word)
    k = len(word)
    if model.kind is ModelKind.BROWNIAN and len(set(word)) == k:
        return horizon ** k / math.factorial(k), "closed form T^k/k! (distinct letters)"
    if k == 1:
        value = covariance(model, horizon, horizon) - 2 * covariance(model, 0.0, horizon) + covariance(model, 0.0, 0.0)
        return value, "covariance R(T,T) - 2R(0,T) + R(0,0)"
    return None, None


def estimate_coordinate_moments(
    model: GaussianModel,
    word,
    grid: SampleGrid,
    n_samples: int,
    seed: SeedSpec,
    m: Optional[int] = None,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> VarianceReport:
    """
    Second and fourth moments of S_I(X) over simulated paths.

    Args:
        model: Gaussian model
        word: Multi-index I
        grid: Sample grid
        n_samples: Number of paths (>= MIN_MOMENT_SAMPLES)
        seed: Master seed; paths use the PATHS stream
        m: Truncation level, defaults to |I|

    Raises:
        DomainError: If |I| > m or there are too few samples
    """
    word = _as_word(word)
    m = len(word) if m is None else m
    if len(word) > m:
        raise DomainError(f"|I| = {len(word)} exceeds truncation level m = {m}")
    if n_samples < MIN_MOMENT_SAMPLES:
        raise DomainError(f"n_samples must be >= {MIN_MOMENT_SAMPLES}, got {n_samples}")

    started = time.perf_counter()
    samples = coordinate_samples(model, grid, word, n_samples, seed, workers=workers, chunk_size=chunk_size)
    squares = samples ** 2
    reference, label = analytic_second_moment(model, word, grid.horizon)

    report = VarianceReport(
        word=word,
        second_moment=float(squares.mean()),
        second_moment_se=jackknife_mean_se(squares),
        fourth_moment=float((squares ** 2).mean()),
        fourth_moment_se=jackknife_mean_se(squares ** 2),
        reference=reference,
        reference_label=label,
        n_steps=grid.n_steps,
        horizon=grid.horizon,
        sample_count=n_samples,
        model=model.label(),
    )
    logger.info(
        f"Moments of S_{format_word(word)} for {model.label()}: "
        f"E[S^2]={report.second_moment:.6g} ± {report.second_moment_se:.2g} "
        f"({n_samples} paths, {time.perf_counter() - started:.1f}s)"
    )
    return report


# ---------------------------------------------------------------------------
# Tails, hypercontractivity, small balls
# ---------------------------------------------------------------------------

def expected_alpha_range(k: int, tolerance: float) -> tuple:
    """Window 2/k - tol .. 2/k + tol for a fitted exponent."""
    alpha = 2.0 / k
    return (alpha - tolerance, alpha + tolerance)


def tail_experiment(
    samples,
    k: int,
    label: str = "",
    quantile_range=DEFAULT_QUANTILE_RANGE,
    method: str = "double_log",
    thresholds=None,
    expected_range: Optional[Sequence[float]] = None,
    two_sided: bool = True,
) -> TailReport:
    """Tail curve of samples plus an exponent fit compared against 2/k."""
    if k < 1:
        raise DomainError(f"chaos level k must be >= 1, got {k}")
    curve = empirical_tail(samples, thresholds, label=label, two_sided=two_sided)
    fit = fit_tail_exponent(curve, quantile_range, method)
    window = tuple(expected_range) if expected_range else expected_alpha_range(k, TAIL_EXPONENT_TOLERANCE)
    logger.info(f"Tail '{label}': alpha_hat={fit.alpha_hat:.4f} (expected {2.0 / k:.4f}), R^2={fit.r_squared:.4f}")
    return TailReport(curve, fit, k, 2.0 / k, window)


def _moment_ratio(values: np.ndarray, p: float) -> float:
    l2 = math.sqrt(float(np.mean(values ** 2)))
    lp = float(np.mean(np.abs(values) ** p)) ** (1.0 / p)
    return lp / l2


def _check_samples(samples, minimum: int) -> np.ndarray:
    values = np.asarray(samples, dtype=np.float64).reshape(-1)
    if values.shape[0] < minimum:
        raise DomainError(f"need at least {minimum} samples, got {values.shape[0]}")
    if not np.all(np.isfinite(values)):
        raise DomainError("samples contain non-finite values")
    if not np.any(values != 0.0):
        raise DomainError("samples have zero L2 norm")
    return values


def hypercontractivity_ratio(
    samples,
    k: int,
    p: float = 4.0,
    seed: Optional[SeedSpec] = None,
    resamples: int = BOOTSTRAP_RESAMPLES,
) -> MomentRatio:
    """
    ||F||_p / ||F||_2 against (p-1)^{k/2}, with a bootstrap standard error.

    Passes when ratio <= (p-1)^{k/2} (1 + 3 SE_rel).

    Args:
        samples: At least MIN_HYPER_SAMPLES draws of F
        k: Chaos order of F
        p: Moment order (p >= 2)
        seed: Bootstrap seed (BOOTSTRAP stream), SeedSpec(0) when omitted

    Raises:
        DomainError: If there are too few samples or the L2 norm is zero
    """
    if p < 2:
        raise DomainError(f"moment order p must be >= 2, got {p}")
    if k < 1:
        raise DomainError(f"chaos level k must be >= 1, got {k}")
    values = _check_samples(samples, MIN_HYPER_SAMPLES)
    ratio = _moment_ratio(values, p)
    std_err = bootstrap_se(values, lambda s: _moment_ratio(s, p), seed or SeedSpec(0), resamples)
    bound = (p - 1.0) ** (k / 2.0)
    passed = ratio <= bound * (1.0 + 3.0 * std_err / ratio)
    return MomentRatio(float(p), int(k), ratio, std_err, bound, bool(passed))


def moment_ladder(
    samples,
    k: int,
    p_values: Sequence[float] = (3.0, 4.0, 6.0),
    seed: Optional[SeedSpec] = None,
    resamples: int = BOOTSTRAP_RESAMPLES,
) -> List[MomentRatio]:
    """``hypercontractivity_ratio`` for several moment orders p."""
    return [hypercontractivity_ratio(samples, k, p, seed, resamples) for p in p_values]


def small_ball_curve(samples, epsilon_grid: Sequence[float], k: int) -> SmallBallTable:
    """
    Empirical P(|F| <= eps * sigma_hat) against C_k eps^{1/k}, C_k = 2k.

    sigma_hat is the empirical L2 norm of F.

    Raises:
        DomainError: If there are too few samples, sigma_hat = 0 or eps outside (0, 1]
    """
    if k < 1:
        raise DomainError(f"chaos level k must be >= 1, got {k}")
    epsilons = [float(e) for e in epsilon_grid]
    if not epsilons or any(not 0.0 < e <= 1.0 for e in epsilons):
        raise DomainError(f"epsilon grid must be a non-empty subset of (0, 1], got {epsilons}")
    values = _check_samples(samples, MIN_HYPER_SAMPLES)
    sigma_hat = math.sqrt(float(np.mean(values ** 2)))
    constant = float(SMALL_BALL_CONSTANT_PER_LEVEL * k)
    magnitudes = np.abs(values)
    n = values.shape[0]

    points = []
    for eps in epsilons:
        probability = float(np.count_nonzero(magnitudes <= eps * sigma_hat)) / n
        bound = constant * eps ** (1.0 / k)
        points.append(
            SmallBallPoint(
                epsilon=eps,
                probability=probability,
                std_err=math.sqrt(probability * (1.0 - probability) / n),
                bound=bound,
                passed=probability <= bound,
            )
        )
    return SmallBallTable(int(k), sigma_hat, constant, points, n)


def optimal_weights(m: int, sigma: float) -> np.ndarray:
    """
    Weights w_k = 1 / (k! sigma^{k/2}), k = 0..m.

    Example:
        >>> optimal_weights(2, 4.0)
        array([1.   , 0.5  , 0.125])
    """
    if m < 1:
        raise DomainError(f"truncation level must be >= 1, got {m}")
    return WeightScheme.scaled_factorial(sigma).weights(m)


# ---------------------------------------------------------------------------
# Mean concentration
# ---------------------------------------------------------------------------

def mean_concentration_experiment(
    model: GaussianModel,
    grid: SampleGrid,
    m: int,
    weights: WeightScheme,
    feature: FeatureKind,
    n_grid: Sequence[int],
    reps: int,
    n_ref: int,
    seed: SeedSpec,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> MeanDeviationCurve:
    """
    Decay of ||mu_hat_n - mu_ref||_w with n.

    mu_ref is the mean of n_ref paths on the REFERENCE stream. Repetition r
    draws its samples from the REPLICATES stream, indices
    [r * sum(n_grid), (r + 1) * sum(n_grid)), so no path is shared with the
    reference or with another (n, r) cell. Log-signature features are
    embedded back into the tensor algebra for the norm.

    Raises:
        DomainError: If n_grid is not strictly increasing, reps < 1 or
            n_ref < 10 * max(n_grid)
    """
    feature = FeatureKind(feature)
    n_values = np.asarray([int(n) for n in n_grid], dtype=np.int64)
    if n_values.size == 0 or np.any(n_values < 1) or np.any(np.diff(n_values) <= 0):
        raise DomainError(f"n_grid must be positive and strictly increasing, got {list(n_grid)}")
    if reps < 1:
        raise DomainError(f"reps must be >= 1, got {reps}")
    if n_ref < 10 * int(n_values.max()):
        raise DomainError(
            f"n_ref={n_ref} must be at least 10 * max(n_grid) = {10 * int(n_values.max())} "
            f"so the reference mean is an independent, larger sample"
        )

    started = time.perf_counter()
    d = model.d
    w = weights.weights(m)
    reference, reference_se = feature_sums(
        model, grid, m, n_ref, seed, feature, 0, Stream.REFERENCE, workers, chunk_size
    )
    reference_error = float(weighted_norm_coords(features_to_tensor(reference_se, feature, d, m), d, m, w))

    block = int(n_values.sum())
    deviations = np.zeros((n_values.size, reps))
    for rep in range(reps):
        offset = rep * block
        for row, n in enumerate(n_values):
            mean, _ = feature_sums(
                model, grid, m, int(n), seed, feature, offset, Stream.REPLICATES, workers, chunk_size
            )
            difference = features_to_tensor(mean - reference, feature, d, m)
            deviations[row, rep] = weighted_norm_coords(difference, d, m, w)
            offset += int(n)
        logger.debug(f"Mean concentration rep {rep + 1}/{reps} done")

    average = deviations.mean(axis=1)
    spread = deviations.std(axis=1, ddof=1) / math.sqrt(reps) if reps > 1 else np.zeros(n_values.size)
    slope = fit_loglog_slope(n_values, average)
    logger.info(
        f"Mean concentration ({feature.value}, m={m}, {model.label()}): slope={slope.slope:.3f} "
        f"over n={list(n_values)} x {reps} reps ({time.perf_counter() - started:.1f}s)"
    )
    return MeanDeviationCurve(
        n_values=n_values,
        deviations=average,
        deviation_se=spread,
        slope=slope,
        weights=weights,
        feature=feature,
        feature_dimension=feature_dimension(feature, d, m),
        reference_count=int(n_ref),
        reference_error=reference_error,
        reps=int(reps),
    )


# ---------------------------------------------------------------------------
# BCH / logarithm Lipschitz probe
# ---------------------------------------------------------------------------

def _sample_in_ball(gen, basis, degrees, radius, w, center=None, spread=None) -> np.ndarray:
    """
    Lyndon coordinates c with ||exp(c)||_w <= radius, by rejection.

    Fresh draws use a standard normal direction dilated by u ~ U(0, R)
    (degree-k coordinates scaled by u^k); perturbations add spread * N(0, I)
    to ``center``.
    """
    d, m = basis.d, basis.m
    for _ in range(BCH_REJECTION_CAP):
        noise = gen.standard_normal(basis.dimension)
        if center is None:
            candidate = noise * gen.uniform(0.0, radius) ** degrees
        else:
            candidate = center + spread * noise
        group = exp_coords(basis.embed(candidate), d, m)
        if weighted_norm_coords(group, d, m, w) <= radius:
            return candidate
    raise SamplingError(
        f"no group-like element with weighted norm <= {radius} after {BCH_REJECTION_CAP} "
        f"attempts (d={d}, m={m}; the level-0 weight makes every norm >= 1)"
    )


def bch_lipschitz_probe(
    d: int,
    m: int,
    radii: Sequence[float],
    pairs: int,
    seed: SeedSpec,
    weights: Optional[WeightScheme] = None,
    perturbation: float = 1e-3,
) -> BCHProbeReport:
    """
    Empirical Lipschitz constant of Log on {||x||_w <= R} for several R.

    For each radius, ``pairs`` pairs x = exp(a), y = exp(b) are drawn from
    the PROBE stream (index radius_index * pairs + pair). Even pairs are
    independent draws; odd pairs perturb a locally. The ratio
    ||Log x - Log y||_w / ||x - y||_w is recorded; pairs with x == y are
    skipped. The growth slope is fitted as log(max ratio) against log(1 + R).

    Raises:
        DomainError: If radii are not positive and strictly increasing or pairs < MIN_BCH_PAIRS
        SamplingError: If rejection sampling exceeds BCH_REJECTION_CAP
    """
    radii = [float(r) for r in radii]
    if not radii or any(r <= 0 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
        raise DomainError(f"radii must be positive and strictly increasing, got {radii}")
    if pairs < MIN_BCH_PAIRS:
        raise DomainError(f"pairs must be >= {MIN_BCH_PAIRS}, got {pairs}")

    weights = weights or WeightScheme.factorial()
    w = weights.weights(m)
    basis = lyndon_basis(d, m)
    degrees = np.array([word.degree for word in basis.words], dtype=np.float64)

    results = []
    for position, radius in enumerate(radii):
        ratios = []
        skipped = 0
        for pair in range(pairs):
            gen = seed.generator(position * pairs + pair, Stream.PROBE)
            a = _sample_in_ball(gen, basis, degrees, radius, w)
            if pair % 2 == 0:
                b = _sample_in_ball(gen, basis, degrees, radius, w)
            else:
                b = _sample_in_ball(gen, basis, degrees, radius, w, center=a, spread=perturbation)
            x = exp_coords(basis.embed(a), d, m)
            y = exp_coords(basis.embed(b), d, m)
            denominator = float(weighted_norm_coords(x - y, d, m, w))
            if denominator == 0.0:
                skipped += 1
                continue
            numerator = float(weighted_norm_coords(log_coords(x, d, m) - log_coords(y, d, m), d, m, w))
            ratios.append(numerator / denominator)
        if not ratios:
            raise SamplingError(f"every probe pair at radius {radius} was degenerate")
        results.append(
            ProbeRadius(radius, float(max(ratios)), float(np.mean(ratios)), len(ratios), skipped)
        )
        logger.debug(f"BCH probe d={d} m={m} R={radius}: max ratio {max(ratios):.4f}")

    slope = None
    if len(results) >= 2:
        slope = fit_loglog_slope([1.0 + r.radius for r in results], [r.max_ratio for r in results])
    report = BCHProbeReport(d, m, results, slope, m - 1 + 0.5)
    logger.info(f"BCH probe d={d} m={m}: slope={None if slope is None else round(slope.slope, 4)}")
    return report


# ---------------------------------------------------------------------------
# Supplementary experiments
# ---------------------------------------------------------------------------

def scaling_experiment(
    model: GaussianModel,
    word,
    horizons: Sequence[float],
    n_steps: int,
    n_samples: int,
    seed: SeedSpec,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> ScalingReport:
    """
    E[S_I^2] on [0, T] for several T; self-similarity predicts T^{2 k H}.

    Horizon number h uses the derived seed ``seed.derive(h)`` so horizons are
    independent samples. Only Brownian motion (H = 1/2) and fBm are
    self-similar.
    """
    word = _as_word(word)
    if model.kind is ModelKind.OU:
        raise DomainError("scaling experiment needs a self-similar model (brownian or fbm)")
    horizons = [float(T) for T in horizons]
    if len(horizons) < 2 or any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise DomainError(f"horizons must be at least two increasing values, got {horizons}")
    if n_samples < MIN_MOMENT_SAMPLES:
        raise DomainError(f"n_samples must be >= {MIN_MOMENT_SAMPLES}, got {n_samples}")

    hurst = 0.5 if model.kind is ModelKind.BROWNIAN else float(model.hurst)
    k = len(word)
    moments, errors = [], []
    for position, horizon in enumerate(horizons):
        grid = SampleGrid(n_steps, horizon)
        samples = coordinate_samples(
            model, grid, word, n_samples, seed.derive(position), workers=workers, chunk_size=chunk_size
        )
        squares = samples ** 2
        moments.append(float(squares.mean()))
        errors.append(jackknife_mean_se(squares))

    exponent = 2.0 * k * hurst
    ratio = moments[-1] / moments[0]
    ratio_se = ratio * math.hypot(errors[-1] / moments[-1], errors[0] / moments[0])
    report = ScalingReport(
        word=word,
        horizons=horizons,
        moments=moments,
        moment_se=errors,
        expected_exponent=exponent,
        slope=fit_loglog_slope(horizons, moments),
        ratio=ratio,
        ratio_se=ratio_se,
        expected_ratio=(horizons[-1] / horizons[0]) ** exponent,
    )
    logger.info(f"Scaling of S_{format_word(word)} for {model.label()}: ratio={ratio:.4f}, expected {report.expected_ratio:.4f}")
    return report


def published_ou_area(theta: float) -> float:
    """Closed form as published: (1/(2θ²))(1 - e^{-2θ}) - (1/θ)(1 - e^{-θ})²."""
    return (1.0 - math.exp(-2.0 * theta)) / (2.0 * theta ** 2) - (1.0 - math.exp(-theta)) ** 2 / theta


def derived_ou_area(theta: float, horizon: float, start: OUStart) -> float:
    """
    E[(A^{1,2}_T)^2] from the Ito isometry.

    The drift terms of the two coordinates cancel in the area, leaving
    A = (∫X¹dB² - ∫X²dB¹)/2, so E[A²] = (1/2)∫R(t,t)dt.
    """
    if OUStart(start) is OUStart.STATIONARY:
        return horizon / (4.0 * theta)
    return (horizon - (1.0 - math.exp(-2.0 * theta * horizon)) / (2.0 * theta)) / (4.0 * theta)


def ou_area_experiment(
    model: GaussianModel,
    n_steps: int,
    horizon: float,
    n_samples: int,
    seed: SeedSpec,
    refinement_grids: Sequence[int] = (1024, 4096),
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> OUAreaReport:
    """
    OU Lévy-area second moment against a grid-refined reference.

    The fixture grid uses the PATHS stream; refinement grid g uses the
    REFINEMENT stream of ``seed.derive(g)``. The reference is the Richardson
    extrapolation E_f + (E_f - E_c) / (r - 1), r = n_f / n_c, of the two
    refinement estimates (bias O(step size)).
    """
    if model.kind is not ModelKind.OU:
        raise DomainError(f"ou_area_experiment needs an OU model, got {model.kind.value}")
    if model.d < 2:
        raise DomainError("Lévy area needs d >= 2")
    coarse, fine = (int(g) for g in refinement_grids)
    if fine <= coarse:
        raise DomainError(f"refinement grids must be increasing, got {list(refinement_grids)}")

    def estimate(grid: SampleGrid, spec: SeedSpec, stream: int):
        squares = levy_area_samples(
            model, grid, n_samples, spec, stream=stream, workers=workers, chunk_size=chunk_size
        ) ** 2
        return float(squares.mean()), jackknife_mean_se(squares)

    started = time.perf_counter()
    empirical, empirical_se = estimate(SampleGrid(n_steps, horizon), seed, Stream.PATHS)
    refinement = {
        g: estimate(SampleGrid(g, horizon), seed.derive(g), Stream.REFINEMENT) for g in (coarse, fine)
    }
    r = fine / coarse
    (e_c, s_c), (e_f, s_f) = refinement[coarse], refinement[fine]
    extrapolated = e_f + (e_f - e_c) / (r - 1.0)
    extrapolated_se = math.hypot(r / (r - 1.0) * s_f, s_c / (r - 1.0))

    report = OUAreaReport(
        theta=float(model.theta),
        horizon=float(horizon),
        start=model.start.value,
        n_steps=int(n_steps),
        empirical=empirical,
        empirical_se=empirical_se,
        refinement=refinement,
        extrapolated=extrapolated,
        extrapolated_se=extrapolated_se,
        published=published_ou_area(model.theta),
        derived=derived_ou_area(model.theta, horizon, model.start),
        sample_count=int(n_samples),
    )
    logger.info(
        f"OU area {model.label()}: E[A^2]={empirical:.6g}, extrapolated={extrapolated:.6g}, "
        f"derived={report.derived:.6g}, published={report.published:.6g} "
        f"({time.perf_counter() - started:.1f}s)"
    )
    return report


def norm_samples(
    model: GaussianModel,
    grid: SampleGrid,
    m: int,
    weights: WeightScheme,
    n_samples: int,
    seed: SeedSpec,
    feature: FeatureKind = FeatureKind.SIGNATURE,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> np.ndarray:
    """
    Weighted norms of simulated features over levels 1..m.

    The constant scalar level is left out so the norm fluctuates with the path.
    """
    d = model.d
    w = np.array(weights.weights(m), dtype=np.float64)
    w[0] = 0.0
    features = simulate_features(
        model, grid, m, n_samples, seed, feature, workers=workers, chunk_size=chunk_size
    )
    return weighted_norm_coords(features_to_tensor(features, feature, d, m), d, m, w)


def norm_tail_experiment(
    model: GaussianModel,
    grid: SampleGrid,
    m: int,
    weights: WeightScheme,
    n_samples: int,
    seed: SeedSpec,
    feature: FeatureKind = FeatureKind.SIGNATURE,
    quantile_range=DEFAULT_QUANTILE_RANGE,
    method: str = "double_log",
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> TailReport:
    """
    Upper deviations ||Φ_m(X)||_w - E||Φ_m(X)||_w and their tail exponent.

    The bound predicts exponent at least 2/m.
    """
    feature = FeatureKind(feature)
    norms = norm_samples(model, grid, m, weights, n_samples, seed, feature, workers, chunk_size)
    deviations = norms - norms.mean()
    return tail_experiment(
        deviations,
        k=m,
        label=f"||{feature.value}||_w - mean (m={m})",
        quantile_range=quantile_range,
        method=method,
        two_sided=False,
    )
