"""Seeded random streams: identical (seed, stream_id) give identical draws."""

from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0
    spawn_path: tuple = ()

    def __post_init__(self):
        if not 0 <= self.seed <= MAX_SEED:
            raise ValidationError(
                f"Seed must be a 64-bit unsigned integer, got {self.seed}."
            )
        if self.stream_id < 0:
            raise ValidationError(f"Stream id must be >= 0, got {self.stream_id}.")

    def child(self, index):
        """Independent sub-stream, e.g. one per ladder level or per replicate"""
        return RngStream(self.seed, self.stream_id, self.spawn_path + (int(index),))

    def generator(self):
        sequence = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(self.stream_id, *self.spawn_path)
        )
        return np.random.Generator(np.random.PCG64(sequence))
