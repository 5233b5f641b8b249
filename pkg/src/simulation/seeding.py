"""
Seeding contract for reproducible parallel sampling.

Every random draw in the project comes from a per-item substream:

    Generator(Philox(SeedSequence(entropy=master_seed, spawn_key=(stream, index))))

``index`` is the global index of the path (or bootstrap replicate, or
probe pair) and ``stream`` separates independent uses of the same master
seed (reference sample, fresh replications, bootstrap, ...). Philox is a
counter-based generator, so a substream never depends on how many items
another worker has already drawn. Output is bit-identical for any worker
count and any chunking.
"""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from src.exceptions import DomainError

MAX_SEED = 2 ** 64 - 1


class Stream(IntEnum):
    """Substream families; values are part of the seeding contract."""

    PATHS = 0
    REFERENCE = 1
    REPLICATES = 2
    BOOTSTRAP = 3
    PROBE = 4
    REFINEMENT = 5


@dataclass(frozen=True)
class SeedSpec:
    """
    Master seed of an experiment.

    Attributes:
        master_seed: Unsigned 64-bit integer
    """

    master_seed: int

    def __post_init__(self):
        if not isinstance(self.master_seed, (int, np.integer)) or isinstance(self.master_seed, bool):
            raise DomainError(f"master_seed must be an integer, got {self.master_seed!r}")
        if not 0 <= int(self.master_seed) <= MAX_SEED:
            raise DomainError(f"master_seed must fit in 64 unsigned bits, got {self.master_seed}")
        object.__setattr__(self, "master_seed", int(self.master_seed))

    def generator(self, index: int, stream: int = Stream.PATHS) -> np.random.Generator:
        """Generator of substream (stream, index)."""
        sequence = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(int(stream), int(index)))
        return np.random.Generator(np.random.Philox(sequence))

    def derive(self, label: int) -> "SeedSpec":
        """
        A new master seed for a sub-experiment, e.g. one horizon of a sweep.

        Derived from (master_seed, label) through SeedSequence so that
        sub-experiments do not share substreams.
        """
        state = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(0xD1, int(label))).generate_state(
            2, dtype=np.uint32
        )
        return SeedSpec((int(state[0]) << 32) | int(state[1]))
