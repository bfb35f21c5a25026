"""Deterministic synthetic adapters at a controlled distance from identity.

Randomness comes from numpy's PCG64 keyed by SeedSequence entropy tuples
(seed, factor, block), so every block is generated independently of the
others and regeneration of any single block is reproducible bit for bit
on any platform. The scale knob sigma is the standard deviation of the
strictly-upper generator entries; the induced adapter deviation
epsilon_of grows linearly in sigma while sigma stays small.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .structure import (
    CAYLEY,
    ORTHOGONAL,
    BlockDiagonalFactor,
    GSAdapter,
    make_adapter,
)

GENERATOR_NAME = "numpy-pcg64"


@dataclass(frozen=True)
class SynthSpec:
    n: int
    b: int
    sigma: float
    seed: int
    storage: str = ORTHOGONAL

    def __post_init__(self):
        if self.b < 1 or self.n % self.b != 0:
            raise ValueError(f"block size {self.b} must divide dimension {self.n}")
        if not np.isfinite(self.sigma) or self.sigma < 0.0:
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")
        if self.storage not in (ORTHOGONAL, CAYLEY):
            raise ValueError(f"unknown storage tag {self.storage!r}")


def random_skew(dim: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Skew generator with i.i.d. N(0, sigma^2) strictly-upper entries.

    Entries are drawn in row-major upper-triangle order; the lower
    triangle is the exact negated mirror.
    """
    if sigma < 0.0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    K = np.zeros((dim, dim))
    iu = np.triu_indices(dim, 1)
    K[iu] = rng.normal(0.0, sigma, size=iu[0].size)
    return K - K.T


def _block_rng(seed: int, factor: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(entropy=(seed, factor, block))))


def random_adapter(spec: SynthSpec) -> GSAdapter:
    """Adapter with all 2k blocks drawn via random_skew, then Cayley-mapped.

    Factor index 0 is the left factor, 1 the right; metadata records the
    seed, sigma, and generator so files are self-describing.
    """
    def factor(index: int) -> BlockDiagonalFactor:
        blocks = []
        for i in range(spec.n // spec.b):
            K = random_skew(spec.b, spec.sigma, _block_rng(spec.seed, index, i))
            blocks.append(K if spec.storage == CAYLEY else linalg.cayley(K))
        return BlockDiagonalFactor(blocks=tuple(blocks), storage=spec.storage)

    metadata = {
        "seed": int(spec.seed),
        "sigma": float(spec.sigma),
        "provenance": GENERATOR_NAME,
    }
    return make_adapter(factor(0), factor(1), metadata=metadata)


def epsilon_of(adapter: GSAdapter) -> float:
    """max over blocks of ||B_i - I||_2, the smallness scale of the adapter."""
    eps = 0.0
    eye = np.eye(adapter.b)
    for factor in (adapter.left, adapter.right):
        for blk in factor.materialized().blocks:
            eps = max(eps, float(np.linalg.norm(blk - eye, 2)))
    return eps
