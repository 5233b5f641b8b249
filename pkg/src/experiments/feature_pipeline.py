"""
Simulate-then-featurize pipeline.

Paths are simulated chunk by chunk (fixed chunk boundaries, optional
threads) and reduced to features before the next chunk is drawn, so only
one chunk of raw paths is alive per worker. Per-chunk results are combined
in chunk order; the outcome does not depend on the worker count.
"""

import logging
from enum import Enum
from typing import Callable, Sequence, Tuple

import numpy as np

from config.settings import DEFAULT_CHUNK_SIZE, MAX_CHUNK_ELEMENTS
from src.algebra.lie_algebra import lyndon_basis
from src.algebra.tensor_algebra import parse_word, tensor_size, word_index
from src.exceptions import DomainError
from src.signature.signature_engine import batch_log_signature, batch_signature
from src.simulation.gaussian_simulator import GaussianModel, GaussianSimulator, SampleGrid
from src.simulation.parallel import map_chunks
from src.simulation.seeding import SeedSpec, Stream

logger = logging.getLogger(__name__)


class FeatureKind(str, Enum):
    SIGNATURE = "signature"
    LOG_SIGNATURE = "log-signature"


def feature_dimension(kind: FeatureKind, d: int, m: int) -> int:
    """Number of feature coordinates, scalar part excluded (d_m)."""
    if FeatureKind(kind) is FeatureKind.SIGNATURE:
        return tensor_size(d, m) - 1
    return lyndon_basis(d, m).dimension


def features_to_tensor(features: np.ndarray, kind: FeatureKind, d: int, m: int) -> np.ndarray:
    """Tensor coordinates of feature vectors, for weighted norms."""
    if FeatureKind(kind) is FeatureKind.SIGNATURE:
        return features
    return lyndon_basis(d, m).embed(features)


def featurize(values: np.ndarray, m: int, kind: FeatureKind) -> np.ndarray:
    """
    Signature (tensor coordinates) or log-signature (Lyndon coordinates).

    Args:
        values: Array (N, L + 1, d)
        m: Truncation level
        kind: Feature kind
    """
    if FeatureKind(kind) is FeatureKind.SIGNATURE:
        return batch_signature(values, m)
    return batch_log_signature(values, m)


def effective_chunk_size(grid: SampleGrid, d: int, chunk_size: int = DEFAULT_CHUNK_SIZE) -> int:
    """Chunk size capped so one chunk holds at most MAX_CHUNK_ELEMENTS path values."""
    per_path = (grid.n_steps + 1) * d
    return max(1, min(int(chunk_size), MAX_CHUNK_ELEMENTS // per_path))


def simulate_reduce(
    model: GaussianModel,
    grid: SampleGrid,
    reduce: Callable[[np.ndarray], np.ndarray],
    count: int,
    seed: SeedSpec,
    start: int = 0,
    stream: int = Stream.PATHS,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> np.ndarray:
    """
    Simulate paths [start, start + count) and apply ``reduce`` per chunk.

    ``reduce`` maps a (n, L + 1, d) block to an array whose first axis is
    n; chunk results are concatenated in order.
    """
    if count < 1:
        raise DomainError(f"sample count must be >= 1, got {count}")
    simulator = GaussianSimulator(model, grid)
    size = effective_chunk_size(grid, model.d, chunk_size)
    blocks = map_chunks(
        lambda a, b: reduce(simulator.sample_values(a, b, seed, stream)),
        start,
        count,
        workers,
        size,
    )
    return np.concatenate(blocks, axis=0)


def simulate_features(
    model: GaussianModel,
    grid: SampleGrid,
    m: int,
    count: int,
    seed: SeedSpec,
    kind: FeatureKind = FeatureKind.SIGNATURE,
    start: int = 0,
    stream: int = Stream.PATHS,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> np.ndarray:
    """Features of simulated paths, shape (count, size) or (count, Lyndon dimension)."""
    return simulate_reduce(
        model, grid, lambda v: featurize(v, m, kind), count, seed, start, stream, workers, chunk_size
    )


def _restrict(word) -> Tuple[Tuple[int, ...], np.ndarray]:
    """Relabel a word onto its own letters: (2, 3, 2) -> (1, 2, 1), columns [1, 2]."""
    letters = sorted(set(word))
    relabel = {letter: position + 1 for position, letter in enumerate(letters)}
    return tuple(relabel[letter] for letter in word), np.array(letters) - 1


def coordinate_samples(
    model: GaussianModel,
    grid: SampleGrid,
    word,
    count: int,
    seed: SeedSpec,
    stream: int = Stream.PATHS,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> np.ndarray:
    """
    Samples of one signature coordinate S_I(X).

    Only the coordinates of X that appear in I enter the signature kernel.

    Raises:
        DomainError: If the word is empty or uses a letter above model.d
    """
    word = parse_word(word) if isinstance(word, str) else tuple(int(letter) for letter in word)
    if not word:
        raise DomainError("coordinate word must be non-empty")
    if max(word) > model.d or min(word) < 1:
        raise DomainError(f"word {word} uses letters outside 1..{model.d}")
    local, columns = _restrict(word)
    k, d_local = len(word), len(columns)
    index = word_index(local, d_local, k)

    def reduce(values: np.ndarray) -> np.ndarray:
        return batch_signature(values[:, :, columns], k)[:, index]

    return simulate_reduce(model, grid, reduce, count, seed, 0, stream, workers, chunk_size)


def area_from_values(values: np.ndarray, i: int = 1, j: int = 2) -> np.ndarray:
    """Lévy areas (S_ij - S_ji) / 2 of a (N, L + 1, d) block; letters are 1-based."""
    if i == j:
        raise DomainError("Lévy area needs two distinct letters")
    sig = batch_signature(values[:, :, [i - 1, j - 1]], 2)
    return 0.5 * (sig[:, word_index((1, 2), 2)] - sig[:, word_index((2, 1), 2)])


def levy_area_samples(
    model: GaussianModel,
    grid: SampleGrid,
    count: int,
    seed: SeedSpec,
    letters: Sequence[int] = (1, 2),
    stream: int = Stream.PATHS,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> np.ndarray:
    """Samples of the Lévy area A^{i,j}."""
    i, j = int(letters[0]), int(letters[1])
    if i == j or not (1 <= i <= model.d and 1 <= j <= model.d):
        raise DomainError(f"Lévy area letters must be distinct and in 1..{model.d}, got ({i}, {j})")
    return simulate_reduce(
        model, grid, lambda v: area_from_values(v, i, j), count, seed, 0, stream, workers, chunk_size
    )


def feature_sums(
    model: GaussianModel,
    grid: SampleGrid,
    m: int,
    count: int,
    seed: SeedSpec,
    kind: FeatureKind = FeatureKind.SIGNATURE,
    start: int = 0,
    stream: int = Stream.PATHS,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Mean and standard error (per coordinate) of features over [start, start + count).

    Per-chunk sums are combined in chunk order, so only chunk sums are held.
    """

    def reduce(values: np.ndarray) -> np.ndarray:
        features = featurize(values, m, kind)
        return np.stack([features.sum(axis=0), (features ** 2).sum(axis=0)])[None]

    partial = simulate_reduce(model, grid, reduce, count, seed, start, stream, workers, chunk_size)
    totals = partial.sum(axis=0)
    mean = totals[0] / count
    variance = np.maximum(totals[1] / count - mean ** 2, 0.0) * count / max(count - 1, 1)
    return mean, np.sqrt(variance / count)
