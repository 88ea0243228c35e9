import zlib

import numpy as np


def _key(value: str | int) -> int:
    if isinstance(value, int):
        return value
    return zlib.crc32(value.encode("utf-8"))


class SeedStreams:
    """Named per-purpose random streams derived from one global seed.

    `generator("init", "Ada", "blended")` always yields the same stream for
    the same seed, independent of what else ran before it.
    """

    def __init__(self, seed: int) -> None:
        self.seed = seed

    def generator(self, purpose: str, *keys: str | int) -> np.random.Generator:
        entropy = [self.seed, _key(purpose), *(_key(k) for k in keys)]
        return np.random.default_rng(np.random.SeedSequence(entropy))
