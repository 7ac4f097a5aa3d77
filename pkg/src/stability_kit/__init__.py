"""Replicable algorithms and privacy transforms over replayable randomness."""

from .distributions import BOT, FiniteDistribution, indistinguishable, tv_distance
from .sampling import consistent_sample, sample_implicit_int
from .tape import RandomTape, Seed, derive_stream

__version__ = "0.1.0"

__all__ = [
    "BOT",
    "FiniteDistribution",
    "RandomTape",
    "Seed",
    "__version__",
    "consistent_sample",
    "derive_stream",
    "indistinguishable",
    "sample_implicit_int",
    "tv_distance",
]
