import numpy as np
import pytest


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def random_skew(rng: np.random.Generator, dim: int, sigma: float) -> np.ndarray:
    """Skew matrix with i.i.d. N(0, sigma^2) strictly-upper entries, exactly skew."""
    K = np.zeros((dim, dim))
    iu = np.triu_indices(dim, 1)
    K[iu] = rng.normal(0.0, sigma, size=iu[0].size)
    return K - K.T


def unit_spectral_skew(rng: np.random.Generator, dim: int) -> np.ndarray:
    K = random_skew(rng, dim, 1.0)
    return K / np.linalg.norm(K, 2)


@pytest.fixture
def rng():
    return make_rng(20260822)
