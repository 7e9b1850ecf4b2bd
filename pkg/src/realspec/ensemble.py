"""The ensemble P_m = X_m ... X_1 and the random streams used to sample it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EnsembleSpec:
    """Product of ``m`` independent ``N x N`` standard Gaussian matrices."""

    N: int
    m: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "m", int(self.m))


def rng_stream(seed: int, index: int) -> np.random.Generator:
    """Independent Philox stream number ``index`` under a 64-bit ``seed``.

    Streams are keyed on (seed, index) only, so the same block of work always
    sees the same variates no matter which worker runs it.
    """
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))
