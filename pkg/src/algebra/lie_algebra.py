"""
Free Lie Algebra in the Lyndon Basis

Lyndon words of degree <= m, their standard bracketings, and the maps
between tensor coordinates and Lyndon (log-signature) coordinates.

The key structural fact used here: expanding the standard bracketing of a
Lyndon word w into words gives w itself with coefficient 1 plus words that
are lexicographically larger. Restricted to the columns of the Lyndon words,
the degree-k expansion matrix is therefore unitriangular, and projecting a
Lie element onto the basis is a single triangular solve per degree.

Basis tables are built once per (d, m) and shared read-only.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterator, List, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import solve_triangular
from sympy.ntheory import divisors, mobius

from config.settings import LYNDON_PROJECTION_TOLERANCE
from src.exceptions import DomainError, NotLieElementError
from .tensor_algebra import (
    TruncatedTensor,
    _outer,
    exp_coords,
    format_word,
    level_offsets,
    log_coords,
    parse_word,
    product_coords,
    tensor_size,
    word_index,
)

logger = logging.getLogger(__name__)

BracketTree = Union[int, Tuple["BracketTree", "BracketTree"]]


def is_lyndon(word: Sequence[int]) -> bool:
    """True if word is strictly smaller than all of its proper rotations."""
    word = tuple(word)
    if not word:
        return False
    return all(word < word[i:] + word[:i] for i in range(1, len(word)))


@dataclass(frozen=True, order=True)
class LyndonWord:
    """
    A Lyndon word over {1..d}.

    Ordering is (degree, lexicographic), the canonical basis order.
    """

    degree: int
    word: Tuple[int, ...]

    def __init__(self, word: Union["LyndonWord", str, Sequence[int]]):
        if isinstance(word, LyndonWord):
            word = word.word
        word = parse_word(word) if isinstance(word, str) else tuple(int(x) for x in word)
        if not is_lyndon(word):
            raise DomainError(f"{format_word(word) or '()'} is not a Lyndon word")
        object.__setattr__(self, "word", word)
        object.__setattr__(self, "degree", len(word))

    def __str__(self) -> str:
        return format_word(self.word)

    def __repr__(self) -> str:
        return f"LyndonWord('{self}')"


def _duval(d: int, m: int) -> Iterator[Tuple[int, ...]]:
    """Duval's generator: Lyndon words of length <= m in lexicographic order."""
    w = [-1]
    while w:
        w[-1] += 1
        yield tuple(letter + 1 for letter in w)
        n = len(w)
        while len(w) < m:
            w.append(w[len(w) - n])
        while w and w[-1] == d - 1:
            w.pop()


def lyndon_words(d: int, m: int) -> List[LyndonWord]:
    """
    All Lyndon words of degree <= m, sorted by (degree, lexicographic).

    Example:
        >>> [str(w) for w in lyndon_words(2, 3)]
        ['1', '2', '12', '112', '122']
    """
    if d < 1 or m < 1:
        raise DomainError(f"lyndon_words needs d >= 1 and m >= 1, got d={d}, m={m}")
    return sorted(LyndonWord(word) for word in _duval(d, m))


def witt_dimension(d: int, k: int) -> int:
    """Dimension of the degree-k part of the free Lie algebra on d letters."""
    if d < 1 or k < 1:
        raise DomainError(f"witt_dimension needs d >= 1 and k >= 1, got d={d}, k={k}")
    total = sum(int(mobius(e)) * d ** (k // e) for e in divisors(k))
    return total // k


def standard_bracketing(w: Union[LyndonWord, Sequence[int]]) -> BracketTree:
    """
    Standard bracketing of a Lyndon word.

    Degree-1 words are leaves; otherwise w = u v with v the longest proper
    Lyndon suffix and the result is [bracketing(u), bracketing(v)].

    Example:
        >>> standard_bracketing(LyndonWord("112"))
        (1, (1, 2))
    """
    word = w.word if isinstance(w, LyndonWord) else LyndonWord(w).word
    return _bracketing(word)


@lru_cache(maxsize=None)
def _bracketing(word: Tuple[int, ...]) -> BracketTree:
    if len(word) == 1:
        return word[0]
    for split in range(1, len(word)):
        suffix = word[split:]
        if is_lyndon(suffix):
            return (_bracketing(word[:split]), _bracketing(suffix))
    raise DomainError(f"{format_word(word)} has no proper Lyndon suffix")


def format_bracket(tree: BracketTree) -> str:
    """Render a bracket tree as "[1,[1,2]]"."""
    if isinstance(tree, tuple):
        return f"[{format_bracket(tree[0])},{format_bracket(tree[1])}]"
    return str(tree)


def bracket_degree(tree: BracketTree) -> int:
    if isinstance(tree, tuple):
        return bracket_degree(tree[0]) + bracket_degree(tree[1])
    return 1


def _expand(tree: BracketTree, d: int) -> np.ndarray:
    """Homogeneous coordinates of a bracket tree at its own degree."""
    if isinstance(tree, tuple):
        left = _expand(tree[0], d)
        right = _expand(tree[1], d)
        return _outer(left, right) - _outer(right, left)
    if not 1 <= tree <= d:
        raise DomainError(f"letter {tree} outside alphabet 1..{d}")
    leaf = np.zeros(d)
    leaf[tree - 1] = 1.0
    return leaf


def bracket_to_tensor(tree: BracketTree, d: int, m: int) -> TruncatedTensor:
    """
    Expand nested commutators [a, b] = a⊗b - b⊗a into tensor coordinates.

    Raises:
        DomainError: If the tree degree exceeds m
    """
    degree = bracket_degree(tree)
    if degree > m:
        raise DomainError(f"bracket of degree {degree} exceeds truncation level {m}")
    coords = np.zeros(tensor_size(d, m))
    offsets = level_offsets(d, m)
    coords[offsets[degree]:offsets[degree + 1]] = _expand(tree, d)
    return TruncatedTensor(d, m, coords)


class LyndonBasis:
    """
    Basis tables for one (d, m).

    Attributes:
        words: All Lyndon words in canonical order
        degree_slices: Slice of ``words`` holding each degree k (index k)
        expansions: Degree-k expansion matrix, rows = bracketings, columns = words
        pivots: Column (word) index of each Lyndon word inside its level
    """

    def __init__(self, d: int, m: int):
        self.d = d
        self.m = m
        self.words = lyndon_words(d, m)
        self.degree_slices = [slice(0, 0)]
        self.expansions = [np.zeros((0, 1))]
        self.pivots = [np.zeros(0, dtype=int)]
        self.triangular = [np.zeros((0, 0))]

        start = 0
        for k in range(1, m + 1):
            degree_words = [w for w in self.words if w.degree == k]
            stop = start + len(degree_words)
            self.degree_slices.append(slice(start, stop))
            start = stop

            offset = level_offsets(d, k)[k]
            rows = [_expand(_bracketing(w.word), d) for w in degree_words]
            matrix = np.array(rows).reshape(len(degree_words), d ** k)
            pivots = np.array([word_index(w.word, d) - offset for w in degree_words], dtype=int)
            triangular = matrix[:, pivots].T

            if not np.allclose(np.diag(triangular), 1.0) or np.any(np.triu(triangular, 1) != 0.0):
                raise DomainError(f"Lyndon expansion at degree {k} is not unitriangular")

            self.expansions.append(matrix)
            self.pivots.append(pivots)
            self.triangular.append(triangular)

        logger.debug(f"Built Lyndon basis d={d} m={m}: {len(self.words)} words")

    @property
    def dimension(self) -> int:
        return len(self.words)

    def project(self, coords: np.ndarray, tol: float = LYNDON_PROJECTION_TOLERANCE) -> np.ndarray:
        """
        Lyndon coordinates of Lie elements given as tensor coordinates.

        Args:
            coords: Array (..., size) with zero scalar part
            tol: Relative residual tolerance per degree

        Returns:
            Array (..., dimension)

        Raises:
            NotLieElementError: If any degree has residual above tol (1 + ||a^(k)||)
        """
        batch_shape = coords.shape[:-1]
        flat = coords.reshape(-1, coords.shape[-1])
        out = np.zeros((flat.shape[0], self.dimension))
        offsets = level_offsets(self.d, self.m)

        for k in range(1, self.m + 1):
            block = flat[:, offsets[k]:offsets[k + 1]]
            if len(self.pivots[k]) == 0:
                solution = np.zeros((flat.shape[0], 0))
            else:
                rhs = block[:, self.pivots[k]]
                solution = solve_triangular(
                    self.triangular[k], rhs.T, lower=True, unit_diagonal=True
                ).T
            residual = np.linalg.norm(solution @ self.expansions[k] - block, axis=-1)
            allowed = tol * (1.0 + np.linalg.norm(block, axis=-1))
            worst = int(np.argmax(residual - allowed)) if residual.size else 0
            if residual.size and residual[worst] > allowed[worst]:
                raise NotLieElementError(k, float(residual[worst]), float(allowed[worst]))
            out[:, self.degree_slices[k]] = solution

        return out.reshape(batch_shape + (self.dimension,))

    def embed(self, values: np.ndarray) -> np.ndarray:
        """Tensor coordinates of Lyndon coordinate arrays (..., dimension)."""
        batch_shape = values.shape[:-1]
        flat = values.reshape(-1, self.dimension)
        out = np.zeros((flat.shape[0], tensor_size(self.d, self.m)))
        offsets = level_offsets(self.d, self.m)
        for k in range(1, self.m + 1):
            out[:, offsets[k]:offsets[k + 1]] = flat[:, self.degree_slices[k]] @ self.expansions[k]
        return out.reshape(batch_shape + (out.shape[-1],))


@lru_cache(maxsize=None)
def lyndon_basis(d: int, m: int) -> LyndonBasis:
    """Shared basis tables for (d, m)."""
    return LyndonBasis(d, m)


@dataclass(frozen=True, eq=False)
class LieCoordinates:
    """
    Element of the free Lie algebra in Lyndon coordinates.

    Attributes:
        d: Alphabet size
        m: Truncation level
        values: Read-only coefficients in canonical Lyndon order
    """

    d: int
    m: int
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        basis = lyndon_basis(self.d, self.m)
        if values.shape[0] != basis.dimension:
            raise DomainError(
                f"expected {basis.dimension} Lyndon coefficients for d={self.d}, m={self.m}, "
                f"got {values.shape[0]}"
            )
        if not np.all(np.isfinite(values)):
            raise DomainError("Lie coefficients must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def basis(self) -> LyndonBasis:
        return lyndon_basis(self.d, self.m)

    @classmethod
    def zeros(cls, d: int, m: int) -> "LieCoordinates":
        return cls(d, m, np.zeros(lyndon_basis(d, m).dimension))

    @classmethod
    def from_dict(cls, d: int, m: int, terms: Dict[Union[str, Sequence[int]], float]) -> "LieCoordinates":
        """
        Example:
            >>> LieCoordinates.from_dict(2, 2, {"1": 1.0, "12": 0.5})
        """
        basis = lyndon_basis(d, m)
        position = {w.word: i for i, w in enumerate(basis.words)}
        values = np.zeros(basis.dimension)
        for key, value in terms.items():
            word = LyndonWord(key).word
            if word not in position:
                raise DomainError(f"{format_word(word)} is not a basis word for d={d}, m={m}")
            values[position[word]] = value
        return cls(d, m, values)

    def coefficient(self, word: Union[str, Sequence[int]]) -> float:
        target = LyndonWord(word).word
        for w, value in zip(self.basis.words, self.values):
            if w.word == target:
                return float(value)
        raise DomainError(f"{format_word(target)} is not a basis word for d={self.d}, m={self.m}")

    def by_degree(self) -> List[List[Tuple[LyndonWord, float]]]:
        """Per-degree (word, coefficient) lists; index 0 is degree 1."""
        basis = self.basis
        return [
            list(zip(basis.words[basis.degree_slices[k]], self.values[basis.degree_slices[k]]))
            for k in range(1, self.m + 1)
        ]

    def to_dict(self, tol: float = 0.0) -> Dict[str, float]:
        return {
            str(w): float(value)
            for w, value in zip(self.basis.words, self.values)
            if abs(value) > tol
        }

    def allclose(self, other: "LieCoordinates", atol: float = 1e-10) -> bool:
        if (self.d, self.m) != (other.d, other.m):
            return False
        return bool(np.max(np.abs(self.values - other.values), initial=0.0) <= atol)

    def __repr__(self) -> str:
        return f"LieCoordinates(d={self.d}, m={self.m}, nonzero={len(self.to_dict(1e-15))})"


def tensor_to_lyndon(a: TruncatedTensor, tol: float = LYNDON_PROJECTION_TOLERANCE) -> LieCoordinates:
    """
    Lyndon coordinates of a Lie element.

    Raises:
        DomainError: If the scalar part is non-zero
        NotLieElementError: If a degree cannot be matched within tolerance
    """
    if a.coords[0] != 0.0:
        raise DomainError(f"tensor_to_lyndon needs level-0 coordinate 0, got {a.coords[0]!r}")
    values = lyndon_basis(a.d, a.m).project(a.coords, tol)
    return LieCoordinates(a.d, a.m, values)


def lyndon_to_tensor(c: LieCoordinates) -> TruncatedTensor:
    """sum_w c_w * bracket_to_tensor(w)."""
    return TruncatedTensor(c.d, c.m, c.basis.embed(c.values))


def bch(A: LieCoordinates, B: LieCoordinates) -> LieCoordinates:
    """
    Truncated Baker-Campbell-Hausdorff product log(exp(A) exp(B)).

    Evaluated numerically in the tensor algebra; no coefficient tables.
    """
    if (A.d, A.m) != (B.d, B.m):
        raise DomainError(f"bch shape mismatch: (d={A.d}, m={A.m}) vs (d={B.d}, m={B.m})")
    d, m = A.d, A.m
    basis = A.basis
    product = product_coords(
        exp_coords(basis.embed(A.values), d, m),
        exp_coords(basis.embed(B.values), d, m),
        d,
        m,
    )
    logarithm = log_coords(product, d, m)
    logarithm[0] = 0.0
    return LieCoordinates(d, m, basis.project(logarithm))
