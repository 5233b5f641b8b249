"""
Signature Engine

Signatures and log-signatures of piecewise-linear paths.

For a piecewise-linear path the signature is exactly the ordered product
of the segment exponentials exp(Δx_1) ⊗ exp(Δx_2) ⊗ ... (Chen identity),
so no quadrature is involved. The product is accumulated in place, one
segment at a time, with a Horner-style update of each level:

    S^(k) <- S^(k) + ((((Δ/k + S^(1)) ⊗ Δ/(k-1) + S^(2)) ⊗ Δ/(k-2) ...) ⊗ Δ

processing k from m down to 1 so that lower levels are still the old
values when they are read. The batch kernel runs this over many paths at
once; the single-path operations are thin wrappers around it.

Usage:
    from src.signature.signature_engine import Path, path_signature

    path = Path([0.0, 1.0, 2.0], [[0, 0], [1, 0], [1, 1]])
    sig = path_signature(path, m=2)
    print(sig.coefficient((1, 2)))   # 1.0
"""

import logging
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from src.algebra.lie_algebra import LieCoordinates, lyndon_basis
from src.algebra.tensor_algebra import (
    TruncatedTensor,
    _outer,
    log_coords,
    parse_word,
)
from src.exceptions import DomainError

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Path:
    """
    A sampled path with piecewise-linear interpolation.

    Attributes:
        times: Strictly increasing sample times, length L + 1
        values: (L + 1) x d matrix of sample values
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64).reshape(-1)
        values = np.array(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2:
            raise DomainError(f"path values must be a matrix, got shape {values.shape}")
        if times.shape[0] < 2:
            raise DomainError("a path needs at least two samples (L >= 1)")
        if values.shape[0] != times.shape[0]:
            raise DomainError(
                f"path has {times.shape[0]} times but {values.shape[0]} value rows"
            )
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise DomainError("path contains non-finite entries")
        if np.any(np.diff(times) <= 0):
            bad = int(np.argmax(np.diff(times) <= 0)) + 1
            raise DomainError(f"path times must be strictly increasing (row {bad})")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def n_segments(self) -> int:
        return self.times.shape[0] - 1

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values, axis=0)

    def with_times(self, times: Sequence[float]) -> "Path":
        """Same values on a different (strictly increasing) time grid."""
        return Path(times, self.values)

    def value_at(self, t: float) -> np.ndarray:
        """Linearly interpolated value at time t."""
        return np.array([np.interp(t, self.times, self.values[:, j]) for j in range(self.d)])

    def __repr__(self) -> str:
        return (
            f"Path(d={self.d}, segments={self.n_segments}, "
            f"span=[{self.times[0]:g}, {self.times[-1]:g}])"
        )


def reverse_path(p: Path) -> Path:
    """The path run backwards over the same time span."""
    times = p.times[0] + p.times[-1] - p.times[::-1]
    return Path(times, p.values[::-1])


def batch_signature(values: np.ndarray, m: int) -> np.ndarray:
    """
    Truncated signatures of many piecewise-linear paths.

    Args:
        values: Array (N, L + 1, d) of path samples
        m: Truncation level

    Returns:
        Array (N, size) of signature coordinates in canonical layout
    """
    if m < 1:
        raise DomainError(f"truncation level must be >= 1, got {m}")
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 3 or values.shape[1] < 2:
        raise DomainError(f"expected values of shape (N, L+1, d) with L >= 1, got {values.shape}")

    n_paths, _, d = values.shape
    increments = np.diff(values, axis=1)
    levels = [np.ones((n_paths, 1))] + [np.zeros((n_paths, d ** k)) for k in range(1, m + 1)]

    for step in range(increments.shape[1]):
        delta = increments[:, step, :]
        for k in range(m, 0, -1):
            acc = delta / k
            for i in range(1, k):
                acc = _outer(acc + levels[i], delta) / (k - i)
            levels[k] = levels[k] + acc

    return np.concatenate(levels, axis=1)


def batch_log_signature(values: np.ndarray, m: int) -> np.ndarray:
    """
    Log-signatures in Lyndon coordinates of many paths.

    Returns:
        Array (N, number of Lyndon words of degree <= m)
    """
    values = np.asarray(values, dtype=np.float64)
    d = values.shape[-1]
    logarithm = log_coords(batch_signature(values, m), d, m)
    logarithm[:, 0] = 0.0
    return lyndon_basis(d, m).project(logarithm)


def path_signature(p: Path, m: int) -> TruncatedTensor:
    """
    Truncated signature of a piecewise-linear path (group-like, scalar part 1).

    Example:
        >>> path_signature(Path([0, 1], [[0, 0], [1, 0]]), 2).to_dict()
        {'': 1.0, '1': 1.0, '11': 0.5}
    """
    coords = batch_signature(p.values[None, :, :], m)[0]
    return TruncatedTensor(p.d, m, coords)


def path_log_signature(p: Path, m: int) -> LieCoordinates:
    """Log-signature of a path in Lyndon coordinates."""
    return LieCoordinates(p.d, m, batch_log_signature(p.values[None, :, :], m)[0])


def signature_on_interval(p: Path, s: float, t: float, m: int) -> TruncatedTensor:
    """
    Signature of p restricted to [s, t].

    Values at s and t are linearly interpolated, so the restriction is the
    same piecewise-linear path.

    Raises:
        DomainError: If not times[0] <= s < t <= times[-1]
    """
    if not (p.times[0] <= s < t <= p.times[-1]):
        raise DomainError(
            f"interval [{s}, {t}] must satisfy {p.times[0]} <= s < t <= {p.times[-1]}"
        )
    interior = p.times[(p.times > s) & (p.times < t)]
    knots = np.concatenate([[s], interior, [t]])
    values = np.column_stack([np.interp(knots, p.times, p.values[:, j]) for j in range(p.d)])
    return path_signature(Path(knots, values), m)


@lru_cache(maxsize=None)
def _shuffle(u: Word, v: Word) -> Tuple[Tuple[Word, int], ...]:
    if not u:
        return ((v, 1),)
    if not v:
        return ((u, 1),)
    counts: Counter = Counter()
    for word, mult in _shuffle(u[:-1], v):
        counts[word + (u[-1],)] += mult
    for word, mult in _shuffle(u, v[:-1]):
        counts[word + (v[-1],)] += mult
    return tuple(sorted(counts.items()))


def shuffle_product(u, v, m: Optional[int] = None) -> Dict[Word, int]:
    """
    All order-preserving interleavings of u and v, with multiplicities.

    Example:
        >>> shuffle_product("12", "3")
        {(1, 2, 3): 1, (1, 3, 2): 1, (3, 1, 2): 1}
    """
    u = parse_word(u) if isinstance(u, str) else tuple(u)
    v = parse_word(v) if isinstance(v, str) else tuple(v)
    if m is not None and len(u) + len(v) > m:
        raise DomainError(f"|u| + |v| = {len(u) + len(v)} exceeds truncation level {m}")
    return dict(_shuffle(u, v))
