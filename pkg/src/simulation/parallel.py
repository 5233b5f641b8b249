"""
Deterministic chunked execution.

Work over an index range is cut into fixed-size chunks that do not depend
on the worker count; chunks run on a thread pool (numpy releases the GIL
in the heavy kernels) and results are reassembled in index order.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Tuple, TypeVar

from config.settings import DEFAULT_CHUNK_SIZE
from src.exceptions import DomainError

logger = logging.getLogger(__name__)

T = TypeVar("T")


def chunk_ranges(start: int, count: int, chunk_size: int = DEFAULT_CHUNK_SIZE) -> List[Tuple[int, int]]:
    """Half-open [a, b) ranges covering [start, start + count)."""
    if count < 0 or chunk_size < 1:
        raise DomainError(f"invalid chunking: count={count}, chunk_size={chunk_size}")
    return [(a, min(a + chunk_size, start + count)) for a in range(start, start + count, chunk_size)]


def map_chunks(
    func: Callable[[int, int], T],
    start: int,
    count: int,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> List[T]:
    """
    Apply func(a, b) to every chunk and return the results in chunk order.

    Args:
        func: Work on the half-open index range [a, b)
        start: First global index
        count: Number of indices
        workers: Thread count; results do not depend on it
        chunk_size: Indices per chunk
    """
    ranges = chunk_ranges(start, count, chunk_size)
    logger.debug(f"Running {len(ranges)} chunk(s) of <= {chunk_size} on {workers} worker(s)")
    if workers <= 1 or len(ranges) <= 1:
        return [func(a, b) for a, b in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: func(*r), ranges))
