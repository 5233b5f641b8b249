"""
Truncated Tensor Algebra

Arithmetic in T^(m)(R^d) = R + R^d + (R^d)^{⊗2} + ... + (R^d)^{⊗m}.

Elements are stored densely: one float64 array holding every level back to
back, and inside a level the words in lexicographic order. The word
(i_1, ..., i_k) over the alphabet {1..d} therefore sits at

    offset(k) + sum_j (i_j - 1) * d^(k - j),   offset(k) = sum_{l<k} d^l

which is exactly the row-major flattening of a k-dimensional d x ... x d
array. Because of that, the product of a level-i block and a level-j block
is an outer product followed by a reshape.

Two layers are provided:
- coordinate kernels (``product_coords``, ``exp_coords``, ``log_coords``,
  ``weighted_norm_coords``) that operate on arrays of shape (..., size) and
  broadcast over any leading batch dimensions;
- the immutable ``TruncatedTensor`` value type and the public operations
  ``tensor_product``, ``tensor_exp``, ``tensor_log`` and ``weighted_norm``.

Levels above m are silently discarded.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.exceptions import DomainError

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]


# ---------------------------------------------------------------------------
# Layout
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def level_offsets(d: int, m: int) -> Tuple[int, ...]:
    """
    Start offsets of every level plus the total size.

    Args:
        d: Alphabet size
        m: Truncation level

    Returns:
        Tuple of length m + 2; level k occupies [offsets[k], offsets[k+1])
    """
    if d < 1 or m < 0:
        raise DomainError(f"invalid tensor shape d={d}, m={m}")
    offsets = [0]
    for k in range(m + 1):
        offsets.append(offsets[-1] + d ** k)
    return tuple(offsets)


def tensor_size(d: int, m: int) -> int:
    """Number of coordinates of T^(m)(R^d)."""
    return level_offsets(d, m)[-1]


def word_index(word: Sequence[int], d: int, m: Optional[int] = None) -> int:
    """
    Position of a word in the canonical coordinate layout.

    Args:
        word: Letters in {1..d}; the empty word is the scalar slot
        d: Alphabet size
        m: Optional truncation level; when given the word length is checked

    Returns:
        Non-negative coordinate index

    Raises:
        DomainError: If a letter is out of range or the word is too long

    Example:
        >>> word_index((1, 2), 2)
        4
    """
    word = tuple(word)
    if m is not None and len(word) > m:
        raise DomainError(f"word {word} is longer than truncation level {m}")
    index = 0
    for letter in word:
        if not 1 <= letter <= d:
            raise DomainError(f"letter {letter} outside alphabet 1..{d}")
        index = index * d + (letter - 1)
    return level_offsets(d, len(word))[len(word)] + index


def word_of(index: int, d: int) -> Word:
    """
    Inverse of ``word_index``.

    Args:
        index: Coordinate index
        d: Alphabet size

    Returns:
        The word stored at that index
    """
    if index < 0:
        raise DomainError(f"negative coordinate index {index}")
    k = 0
    start = 0
    while index >= start + d ** k:
        start += d ** k
        k += 1
    rest = index - start
    letters = []
    for _ in range(k):
        rest, letter = divmod(rest, d)
        letters.append(letter + 1)
    return tuple(reversed(letters))


def words(d: int, m: int) -> Iterator[Word]:
    """All words of length <= m in canonical order."""
    for k in range(m + 1):
        yield from itertools.product(range(1, d + 1), repeat=k)


def format_word(word: Sequence[int]) -> str:
    """
    Human-readable label of a word.

    Letters are concatenated when d < 10 ("12") and comma separated
    otherwise, so labels stay unambiguous.
    """
    if any(letter >= 10 for letter in word):
        return ",".join(str(letter) for letter in word)
    return "".join(str(letter) for letter in word)


def parse_word(text: str) -> Word:
    """Inverse of ``format_word``; also accepts lists of ints."""
    if isinstance(text, (list, tuple)):
        return tuple(int(letter) for letter in text)
    text = str(text).strip()
    if not text:
        return ()
    if "," in text:
        return tuple(int(part) for part in text.split(","))
    return tuple(int(ch) for ch in text)


def coordinate_labels(d: int, m: int) -> List[str]:
    """Column labels S(), S(1), S(1,2), ... in canonical order."""
    return [f"S({','.join(str(letter) for letter in word)})" for word in words(d, m)]


# ---------------------------------------------------------------------------
# Coordinate kernels
# ---------------------------------------------------------------------------

def split_levels(coords: np.ndarray, d: int, m: int) -> List[np.ndarray]:
    """Views of each level block of a (..., size) array."""
    offsets = level_offsets(d, m)
    return [coords[..., offsets[k]:offsets[k + 1]] for k in range(m + 1)]


def _outer(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Word-concatenation product of two homogeneous blocks."""
    outer = left[..., :, None] * right[..., None, :]
    return outer.reshape(outer.shape[:-2] + (left.shape[-1] * right.shape[-1],))


def product_coords(a: np.ndarray, b: np.ndarray, d: int, m: int) -> np.ndarray:
    """
    Truncated tensor product on raw coordinates.

    Args:
        a, b: Arrays of shape (..., size); leading dimensions broadcast
        d: Alphabet size
        m: Truncation level

    Returns:
        Array of shape (..., size) with level k = sum_{i+j=k} a^(i) ⊗ b^(j)
    """
    a_levels = split_levels(a, d, m)
    b_levels = split_levels(b, d, m)
    batch = np.broadcast_shapes(a.shape[:-1], b.shape[:-1])
    out = np.zeros(batch + (tensor_size(d, m),), dtype=np.float64)
    out_levels = split_levels(out, d, m)
    for k in range(m + 1):
        for i in range(k + 1):
            out_levels[k] += _outer(a_levels[i], b_levels[k - i])
    return out


def unit_coords(d: int, m: int) -> np.ndarray:
    """Coordinates of the unit element."""
    unit = np.zeros(tensor_size(d, m), dtype=np.float64)
    unit[0] = 1.0
    return unit


def exp_coords(a: np.ndarray, d: int, m: int) -> np.ndarray:
    """
    Truncated exponential of elements with zero scalar part.

    Horner form: exp(a) = 1 + a(1 + a/2(1 + a/3(...))).
    """
    unit = unit_coords(d, m)
    result = np.broadcast_to(unit, a.shape).copy()
    for k in range(m, 0, -1):
        result = unit + product_coords(a, result, d, m) / k
    return result


def log_coords(g: np.ndarray, d: int, m: int) -> np.ndarray:
    """
    Truncated logarithm of elements with unit scalar part.

    Horner form: log(1 + x) = x(1 - x(1/2 - x(1/3 - ...))).
    """
    unit = unit_coords(d, m)
    x = g - unit
    result = np.broadcast_to(unit / m, g.shape).copy()
    for j in range(m - 1, 0, -1):
        result = unit / j - product_coords(x, result, d, m)
    return product_coords(x, result, d, m)


def level_norms(coords: np.ndarray, d: int, m: int) -> np.ndarray:
    """Euclidean norm of each level block, shape (..., m + 1)."""
    return np.stack(
        [np.linalg.norm(block, axis=-1) for block in split_levels(coords, d, m)],
        axis=-1,
    )


def weighted_norm_coords(coords: np.ndarray, d: int, m: int, weights: np.ndarray) -> np.ndarray:
    """max_k w_k ||a^(k)|| over the last axis."""
    return np.max(level_norms(coords, d, m) * weights, axis=-1)


# ---------------------------------------------------------------------------
# Value type
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TruncatedTensor:
    """
    Immutable element of T^(m)(R^d).

    Attributes:
        d: Alphabet size
        m: Truncation level
        coords: Read-only float64 array in canonical layout
    """

    d: int
    m: int
    coords: np.ndarray

    def __post_init__(self):
        if self.d < 1 or self.m < 1:
            raise DomainError(f"tensor needs d >= 1 and m >= 1, got d={self.d}, m={self.m}")
        coords = np.array(self.coords, dtype=np.float64).reshape(-1)
        expected = tensor_size(self.d, self.m)
        if coords.shape[0] != expected:
            raise DomainError(
                f"coordinate array has length {coords.shape[0]}, expected {expected} "
                f"for d={self.d}, m={self.m}"
            )
        if not np.all(np.isfinite(coords)):
            raise DomainError("tensor coordinates must be finite")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @classmethod
    def zeros(cls, d: int, m: int) -> "TruncatedTensor":
        return cls(d, m, np.zeros(tensor_size(d, m)))

    @classmethod
    def unit(cls, d: int, m: int) -> "TruncatedTensor":
        return cls(d, m, unit_coords(d, m))

    @classmethod
    def from_words(cls, d: int, m: int, terms: Dict[Sequence[int], float]) -> "TruncatedTensor":
        """
        Build a tensor from a {word: coefficient} mapping.

        Example:
            >>> TruncatedTensor.from_words(2, 2, {(): 1.0, (1, 2): 0.5})
        """
        coords = np.zeros(tensor_size(d, m))
        for word, value in terms.items():
            coords[word_index(tuple(word), d, m)] += value
        return cls(d, m, coords)

    def level(self, k: int) -> np.ndarray:
        """Level-k coordinate block (read-only view)."""
        if not 0 <= k <= self.m:
            raise DomainError(f"level {k} outside 0..{self.m}")
        offsets = level_offsets(self.d, self.m)
        return self.coords[offsets[k]:offsets[k + 1]]

    def coefficient(self, word: Sequence[int]) -> float:
        """Coefficient of a single word."""
        return float(self.coords[word_index(tuple(word), self.d, self.m)])

    @property
    def scalar(self) -> float:
        return float(self.coords[0])

    def is_group_like(self) -> bool:
        return self.coords[0] == 1.0

    def norm(self) -> float:
        """Plain Euclidean norm of all coordinates."""
        return float(np.linalg.norm(self.coords))

    def _check_shape(self, other: "TruncatedTensor") -> None:
        if not isinstance(other, TruncatedTensor):
            raise DomainError(f"expected TruncatedTensor, got {type(other).__name__}")
        if (self.d, self.m) != (other.d, other.m):
            raise DomainError(
                f"shape mismatch: (d={self.d}, m={self.m}) vs (d={other.d}, m={other.m})"
            )

    def __add__(self, other: "TruncatedTensor") -> "TruncatedTensor":
        self._check_shape(other)
        return TruncatedTensor(self.d, self.m, self.coords + other.coords)

    def __sub__(self, other: "TruncatedTensor") -> "TruncatedTensor":
        self._check_shape(other)
        return TruncatedTensor(self.d, self.m, self.coords - other.coords)

    def __neg__(self) -> "TruncatedTensor":
        return TruncatedTensor(self.d, self.m, -self.coords)

    def __mul__(self, scale: float) -> "TruncatedTensor":
        return TruncatedTensor(self.d, self.m, self.coords * float(scale))

    __rmul__ = __mul__

    def __truediv__(self, scale: float) -> "TruncatedTensor":
        return TruncatedTensor(self.d, self.m, self.coords / float(scale))

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedTensor):
            return NotImplemented
        return (self.d, self.m) == (other.d, other.m) and np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash((self.d, self.m, self.coords.tobytes()))

    def allclose(self, other: "TruncatedTensor", atol: float = 1e-12) -> bool:
        self._check_shape(other)
        return bool(np.max(np.abs(self.coords - other.coords)) <= atol)

    def to_dict(self, tol: float = 0.0) -> Dict[str, float]:
        """Non-zero coordinates keyed by word label."""
        return {
            format_word(word): float(value)
            for word, value in zip(words(self.d, self.m), self.coords)
            if abs(value) > tol
        }

    def __repr__(self) -> str:
        return f"TruncatedTensor(d={self.d}, m={self.m}, scalar={self.scalar:g}, norm={self.norm():.4g})"


# ---------------------------------------------------------------------------
# Weight schemes
# ---------------------------------------------------------------------------

class WeightKind(str, Enum):
    UNIT = "unit"
    FACTORIAL = "factorial"
    GEOMETRIC_FACTORIAL = "geometric_factorial"
    SCALED_FACTORIAL = "scaled_factorial"


@dataclass(frozen=True)
class WeightScheme:
    """
    Level weights w_0..w_m for the weighted max-norm.

    Variants:
        unit                 w_k = 1
        factorial            w_k = 1/k!
        geometric_factorial  w_k = beta^k / k!
        scaled_factorial        w_k = 1 / (k! sigma^(k/2)), sigma a covariance scale
    """

    kind: WeightKind
    beta: Optional[float] = None
    sigma: Optional[float] = None

    def __post_init__(self):
        kind = WeightKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is WeightKind.GEOMETRIC_FACTORIAL and not (self.beta is not None and self.beta > 0):
            raise DomainError(f"geometric_factorial weights need beta > 0, got {self.beta}")
        if kind is WeightKind.SCALED_FACTORIAL and not (self.sigma is not None and self.sigma > 0):
            raise DomainError(f"scaled_factorial weights need sigma > 0, got {self.sigma}")

    @classmethod
    def unit(cls) -> "WeightScheme":
        return cls(WeightKind.UNIT)

    @classmethod
    def factorial(cls) -> "WeightScheme":
        return cls(WeightKind.FACTORIAL)

    @classmethod
    def geometric_factorial(cls, beta: float) -> "WeightScheme":
        return cls(WeightKind.GEOMETRIC_FACTORIAL, beta=beta)

    @classmethod
    def scaled_factorial(cls, sigma: float) -> "WeightScheme":
        return cls(WeightKind.SCALED_FACTORIAL, sigma=sigma)

    @classmethod
    def from_config(cls, spec: Dict) -> "WeightScheme":
        """Build from a config block {scheme, beta, sigma}."""
        return cls(spec.get("scheme", "factorial"), beta=spec.get("beta"), sigma=spec.get("sigma"))

    def weights(self, m: int) -> np.ndarray:
        """Array (w_0, ..., w_m); w_0 is always 1."""
        k = np.arange(m + 1)
        factorials = np.array([math.factorial(int(i)) for i in k], dtype=np.float64)
        if self.kind is WeightKind.UNIT:
            return np.ones(m + 1)
        if self.kind is WeightKind.FACTORIAL:
            return 1.0 / factorials
        if self.kind is WeightKind.GEOMETRIC_FACTORIAL:
            return self.beta ** k / factorials
        return 1.0 / (factorials * self.sigma ** (k / 2.0))

    def to_dict(self) -> Dict:
        return {"scheme": self.kind.value, "beta": self.beta, "sigma": self.sigma}


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def tensor_product(a: TruncatedTensor, b: TruncatedTensor) -> TruncatedTensor:
    """
    Truncated tensor (concatenation) product a ⊗ b.

    Raises:
        DomainError: If a and b do not share d and m
    """
    a._check_shape(b)
    return TruncatedTensor(a.d, a.m, product_coords(a.coords, b.coords, a.d, a.m))


def tensor_exp(a: TruncatedTensor) -> TruncatedTensor:
    """
    Truncated exponential sum_{k<=m} a^{⊗k}/k!.

    Raises:
        DomainError: If the scalar part of a is not 0
    """
    if a.coords[0] != 0.0:
        raise DomainError(f"tensor_exp needs level-0 coordinate 0, got {a.coords[0]!r}")
    return TruncatedTensor(a.d, a.m, exp_coords(a.coords, a.d, a.m))


def tensor_log(g: TruncatedTensor) -> TruncatedTensor:
    """
    Truncated logarithm sum_{j<=m} (-1)^(j-1) (g-1)^{⊗j}/j.

    Raises:
        DomainError: If the scalar part of g is not 1
    """
    if g.coords[0] != 1.0:
        raise DomainError(f"tensor_log needs level-0 coordinate 1, got {g.coords[0]!r}")
    coords = log_coords(g.coords, g.d, g.m)
    coords[0] = 0.0
    return TruncatedTensor(g.d, g.m, coords)


def weighted_norm(a: TruncatedTensor, w: WeightScheme) -> float:
    """max_k w_k ||a^(k)||, with ||.|| the Euclidean norm of the level block."""
    return float(weighted_norm_coords(a.coords, a.d, a.m, w.weights(a.m)))
