"""
Gaussian Process Simulator

Exact sampling of three centred Gaussian models on uniform grids, each
coordinate an independent copy:

- Brownian motion        R(s,t) = min(s,t)
- fractional Brownian    R(s,t) = (s^{2H} + t^{2H} - |t-s|^{2H}) / 2
- Ornstein-Uhlenbeck     dX = -θ X dt + dB, started at 0 or from stationarity

Methods:
- Brownian: i.i.d. N(0, Δ) increments
- fBm: Cholesky factor of the (Toeplitz) increment covariance, built once
  per (H, grid) and shared read-only
- OU: exact AR(1) recursion X_{k+1} = e^{-θΔ} X_k + ξ_k with
  Var ξ_k = (1 - e^{-2θΔ}) / (2θ)

Draw order for path i (substream (stream, i) of the SeedSpec): for a
stationary OU start, d normals for X_0 first; then an n_steps x d block of
standard normals, row = time step.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Optional

import numpy as np
from scipy.linalg import toeplitz

from config.settings import CHOLESKY_JITTER, DEFAULT_CHUNK_SIZE, LOW_HURST_WARNING, MAX_GRID_STEPS
from src.exceptions import DomainError, NumericError
from src.signature.signature_engine import Path
from .parallel import map_chunks
from .seeding import SeedSpec, Stream

logger = logging.getLogger(__name__)


class ModelKind(str, Enum):
    BROWNIAN = "brownian"
    FBM = "fbm"
    OU = "ou"


class OUStart(str, Enum):
    ZERO = "zero"
    STATIONARY = "stationary"


@dataclass(frozen=True)
class GaussianModel:
    """
    One of the supported Gaussian models.

    Attributes:
        kind: brownian, fbm or ou
        d: Number of independent coordinates
        hurst: Hurst parameter H in (0, 1) for fbm
        theta: Mean-reversion rate θ > 0 for ou
        start: zero or stationary start for ou
    """

    kind: ModelKind
    d: int = 1
    hurst: Optional[float] = None
    theta: Optional[float] = None
    start: OUStart = OUStart.ZERO

    def __post_init__(self):
        try:
            kind = ModelKind(self.kind)
            start = OUStart(self.start)
        except ValueError as e:
            raise DomainError(str(e)) from None
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "start", start)

        if not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise DomainError(f"model.d must be a positive integer, got {self.d!r}")
        if kind is ModelKind.FBM:
            if self.hurst is None or not 0.0 < self.hurst < 1.0:
                raise DomainError(f"model.hurst must lie in (0, 1), got {self.hurst!r}")
            if self.hurst <= LOW_HURST_WARNING:
                logger.warning(self.warning)
        if kind is ModelKind.OU and (self.theta is None or not self.theta > 0.0):
            raise DomainError(f"model.theta must be > 0, got {self.theta!r}")

    @classmethod
    def brownian(cls, d: int = 1) -> "GaussianModel":
        return cls(ModelKind.BROWNIAN, d=d)

    @classmethod
    def fbm(cls, hurst: float, d: int = 1) -> "GaussianModel":
        return cls(ModelKind.FBM, d=d, hurst=hurst)

    @classmethod
    def ou(cls, theta: float, start: str = "zero", d: int = 1) -> "GaussianModel":
        return cls(ModelKind.OU, d=d, theta=theta, start=start)

    @classmethod
    def from_config(cls, spec: Dict) -> "GaussianModel":
        """Build from a config block {kind, d, hurst, theta, start}."""
        return cls(
            spec.get("kind", "brownian"),
            d=spec.get("d", 1),
            hurst=spec.get("hurst"),
            theta=spec.get("theta"),
            start=spec.get("start", "zero"),
        )

    @property
    def rho(self) -> float:
        """Covariance variation index, carried as metadata only."""
        if self.kind is ModelKind.FBM:
            return 1.0 / (2.0 * self.hurst)
        return 1.0

    @property
    def lift_ok(self) -> bool:
        """False for fBm with H <= 1/4, where no rough-path lift is guaranteed."""
        return not (self.kind is ModelKind.FBM and self.hurst <= LOW_HURST_WARNING)

    @property
    def warning(self) -> Optional[str]:
        if self.lift_ok:
            return None
        return (
            f"fBm with H={self.hurst} <= 1/4 lies outside the range where the "
            f"signature lift is guaranteed; results are exploratory"
        )

    def label(self) -> str:
        if self.kind is ModelKind.FBM:
            return f"fbm(H={self.hurst:g},d={self.d})"
        if self.kind is ModelKind.OU:
            return f"ou(theta={self.theta:g},{self.start.value},d={self.d})"
        return f"brownian(d={self.d})"

    def to_dict(self) -> Dict:
        return {
            "kind": self.kind.value,
            "d": int(self.d),
            "hurst": self.hurst,
            "theta": self.theta,
            "start": self.start.value,
            "rho": self.rho,
            "lift_ok": self.lift_ok,
            "warning": self.warning,
        }


@dataclass(frozen=True)
class SampleGrid:
    """
    Uniform grid 0, T/n, ..., T.

    Attributes:
        n_steps: Number of steps n >= 1
        horizon: Final time T > 0
    """

    n_steps: int
    horizon: float = 1.0

    def __post_init__(self):
        if not isinstance(self.n_steps, (int, np.integer)) or self.n_steps < 1:
            raise DomainError(f"grid.n_steps must be a positive integer, got {self.n_steps!r}")
        if self.n_steps > MAX_GRID_STEPS:
            raise DomainError(f"grid.n_steps={self.n_steps} exceeds the cap of {MAX_GRID_STEPS}")
        if not self.horizon > 0:
            raise DomainError(f"grid.horizon must be > 0, got {self.horizon!r}")

    @classmethod
    def from_config(cls, spec: Dict) -> "SampleGrid":
        return cls(int(spec.get("n_steps", 512)), float(spec.get("horizon", 1.0)))

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)

    def to_dict(self) -> Dict:
        return {"n_steps": int(self.n_steps), "horizon": float(self.horizon)}


def covariance(model: GaussianModel, s: float, t: float) -> float:
    """
    Covariance of one coordinate, R(s, t).

    Example:
        >>> covariance(GaussianModel.brownian(), 0.3, 0.7)
        0.3
    """
    if s < 0 or t < 0:
        raise DomainError(f"covariance needs s, t >= 0, got s={s}, t={t}")
    if model.kind is ModelKind.BROWNIAN:
        return float(min(s, t))
    if model.kind is ModelKind.FBM:
        h2 = 2.0 * model.hurst
        return 0.5 * (s ** h2 + t ** h2 - abs(t - s) ** h2)
    theta = model.theta
    stationary = math.exp(-theta * abs(t - s)) / (2.0 * theta)
    if model.start is OUStart.STATIONARY:
        return stationary
    return stationary * (1.0 - math.exp(-2.0 * theta * min(s, t)))


def fbm_increment_covariance(hurst: float, grid: SampleGrid) -> np.ndarray:
    """Toeplitz covariance of the n fBm increments on the grid."""
    lags = np.arange(grid.n_steps, dtype=np.float64)
    h2 = 2.0 * hurst
    gamma = 0.5 * grid.dt ** h2 * (np.abs(lags + 1) ** h2 + np.abs(lags - 1) ** h2 - 2.0 * lags ** h2)
    return toeplitz(gamma)


@lru_cache(maxsize=16)
def fbm_cholesky(hurst: float, n_steps: int, horizon: float) -> np.ndarray:
    """
    Lower Cholesky factor of the fBm increment covariance.

    Retries once with jitter CHOLESKY_JITTER * trace on the diagonal.

    Raises:
        NumericError: If the matrix is still not positive definite
    """
    grid = SampleGrid(n_steps, horizon)
    cov = fbm_increment_covariance(hurst, grid)
    try:
        factor = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        jitter = CHOLESKY_JITTER * float(np.trace(cov))
        logger.warning(f"Cholesky failed for fbm(H={hurst}) on {n_steps} steps; retrying with jitter {jitter:.3e}")
        try:
            factor = np.linalg.cholesky(cov + jitter * np.eye(n_steps))
        except np.linalg.LinAlgError:
            raise NumericError(
                f"increment covariance of fbm(H={hurst}) on grid n_steps={n_steps}, "
                f"horizon={horizon} is not positive definite"
            ) from None
    factor.setflags(write=False)
    logger.debug(f"Built fBm Cholesky factor H={hurst} n={n_steps} T={horizon}")
    return factor


class GaussianSimulator:
    """
    Samples one model on one grid.

    Example:
        >>> sim = GaussianSimulator(GaussianModel.brownian(d=2), SampleGrid(512))
        >>> values = sim.sample_values(0, 1000, SeedSpec(7))
        >>> values.shape
        (1000, 513, 2)
    """

    def __init__(self, model: GaussianModel, grid: SampleGrid):
        """
        Args:
            model: Gaussian model
            grid: Uniform sample grid
        """
        self.model = model
        self.grid = grid
        self.factor = None
        if model.kind is ModelKind.FBM:
            self.factor = fbm_cholesky(float(model.hurst), int(grid.n_steps), float(grid.horizon))

    def _noise(self, start: int, stop: int, seed: SeedSpec, stream: int):
        n, d = self.grid.n_steps, self.model.d
        stationary = self.model.kind is ModelKind.OU and self.model.start is OUStart.STATIONARY
        initial = np.zeros((stop - start, d))
        noise = np.empty((stop - start, n, d))
        for row, index in enumerate(range(start, stop)):
            gen = seed.generator(index, stream)
            if stationary:
                initial[row] = gen.standard_normal(d)
            noise[row] = gen.standard_normal((n, d))
        return initial, noise

    def sample_values(self, start: int, stop: int, seed: SeedSpec, stream: int = Stream.PATHS) -> np.ndarray:
        """
        Sample paths with global indices [start, stop).

        Returns:
            Array (stop - start, n_steps + 1, d) of path values on the grid
        """
        if stop <= start:
            raise DomainError(f"empty sample range [{start}, {stop})")
        initial, noise = self._noise(start, stop, seed, stream)
        dt = self.grid.dt
        count, n, d = noise.shape
        values = np.zeros((count, n + 1, d))

        if self.model.kind is ModelKind.BROWNIAN:
            values[:, 1:, :] = np.cumsum(math.sqrt(dt) * noise, axis=1)
        elif self.model.kind is ModelKind.FBM:
            increments = np.einsum("ij,cjd->cid", self.factor, noise)
            values[:, 1:, :] = np.cumsum(increments, axis=1)
        else:
            theta = self.model.theta
            decay = math.exp(-theta * dt)
            scale = math.sqrt((1.0 - decay * decay) / (2.0 * theta))
            values[:, 0, :] = initial * math.sqrt(1.0 / (2.0 * theta))
            for k in range(n):
                values[:, k + 1, :] = decay * values[:, k, :] + scale * noise[:, k, :]

        return values

    def sample(
        self,
        count: int,
        seed: SeedSpec,
        start: int = 0,
        stream: int = Stream.PATHS,
        workers: int = 1,
        chunk_size: int = DEFAULT_CHUNK_SIZE,
    ) -> np.ndarray:
        """Chunked, optionally threaded ``sample_values`` over [start, start + count)."""
        if count < 1:
            raise DomainError(f"count must be >= 1, got {count}")
        blocks = map_chunks(
            lambda a, b: self.sample_values(a, b, seed, stream), start, count, workers, chunk_size
        )
        return np.concatenate(blocks, axis=0)

    def __repr__(self) -> str:
        return f"GaussianSimulator({self.model.label()}, n_steps={self.grid.n_steps}, T={self.grid.horizon:g})"


def sample_paths(
    model: GaussianModel,
    grid: SampleGrid,
    count: int,
    seed: SeedSpec,
    workers: int = 1,
) -> List[Path]:
    """
    Sample ``count`` independent paths of ``model`` on ``grid``.

    Identical (model, grid, count, seed) give bit-identical paths for any
    number of workers.
    """
    values = GaussianSimulator(model, grid).sample(count, seed, workers=workers)
    times = grid.times()
    return [Path(times, block) for block in values]
