import numpy as np
import pytest
import scipy.stats

from gsfuse import linalg, oracles, structure, synth
from conftest import make_rng


def test_zero_sigma_gives_zero_generator():
    K = synth.random_skew(4, 0.0, make_rng(0))
    assert np.array_equal(K, np.zeros((4, 4)))


def test_zero_sigma_gives_identity_adapter():
    a = synth.random_adapter(synth.SynthSpec(n=8, b=2, sigma=0.0, seed=3))
    for blk in a.left.blocks + a.right.blocks:
        assert np.array_equal(blk, np.eye(2))


def test_random_skew_is_exactly_skew():
    K = synth.random_skew(5, 0.1, make_rng(1))
    assert np.array_equal(K.T, -K)
    assert np.array_equal(np.diag(K), np.zeros(5))


def test_random_skew_deterministic():
    a = synth.random_skew(4, 0.1, make_rng(42))
    b = synth.random_skew(4, 0.1, make_rng(42))
    assert np.array_equal(a, b)


def test_skew_norm_scales_linearly_in_sigma():
    # E||K||_F^2 = sigma^2 * dim * (dim - 1): check the Monte-Carlo mean
    dim = 6
    for sigma in (0.05, 0.1):
        rng = make_rng((11, int(sigma * 100)))
        sq = [np.sum(synth.random_skew(dim, sigma, rng) ** 2) for _ in range(1000)]
        want = sigma ** 2 * dim * (dim - 1)
        assert abs(np.mean(sq) - want) <= 0.1 * want


def test_adapter_deterministic_and_seed_sensitive():
    spec = synth.SynthSpec(n=8, b=2, sigma=0.1, seed=5)
    a, b = synth.random_adapter(spec), synth.random_adapter(spec)
    for x, y in zip(a.left.blocks + a.right.blocks, b.left.blocks + b.right.blocks):
        assert np.array_equal(x, y)
    c = synth.random_adapter(synth.SynthSpec(n=8, b=2, sigma=0.1, seed=6))
    assert any(not np.array_equal(x, y)
               for x, y in zip(a.left.blocks, c.left.blocks))


@pytest.mark.parametrize("storage", [structure.ORTHOGONAL, structure.CAYLEY])
def test_generated_adapters_validate(storage):
    a = synth.random_adapter(synth.SynthSpec(n=16, b=4, sigma=0.1, seed=2,
                                             storage=storage))
    assert a.left.storage == storage
    report = structure.validate(a)
    assert report.passed, report.failures


def test_metadata_records_generation():
    a = synth.random_adapter(synth.SynthSpec(n=4, b=2, sigma=0.1, seed=9))
    assert a.metadata == {"seed": 9, "sigma": 0.1, "provenance": "numpy-pcg64"}


def test_pinned_fixture_epsilon():
    # regression fixture: measured once, must never drift
    a = synth.random_adapter(synth.SynthSpec(n=8, b=2, sigma=0.05, seed=7))
    eps = synth.epsilon_of(a)
    assert eps < 0.5
    assert abs(eps - 0.23565786983497933) <= 1e-15


def test_epsilon_identity_is_zero():
    assert synth.epsilon_of(structure.identity_adapter(6, 2)) == 0.0


@pytest.mark.parametrize("theta", [0.1, 0.8, 2.0])
def test_epsilon_single_rotation_closed_form(theta):
    left = structure.BlockDiagonalFactor(blocks=(oracles.rotation(theta),))
    a = structure.make_adapter(left, structure.identity_factor(2, 2))
    assert np.isclose(synth.epsilon_of(a), 2.0 * abs(np.sin(theta / 2.0)), rtol=1e-12)


def test_epsilon_monotone_in_sigma():
    # independent seeds per draw; blocks of size 8 concentrate the
    # spectral norm enough for the trend to dominate the noise
    sigmas = np.linspace(0.01, 0.2, 20)
    eps = [synth.epsilon_of(synth.random_adapter(
        synth.SynthSpec(n=64, b=8, sigma=float(s), seed=100 + i)))
        for i, s in enumerate(sigmas)]
    rho = scipy.stats.spearmanr(sigmas, eps).statistic
    assert rho > 0.9


def test_epsilon_cayley_storage_materializes():
    spec = synth.SynthSpec(n=8, b=2, sigma=0.05, seed=7, storage=structure.CAYLEY)
    a = synth.random_adapter(spec)
    assert abs(synth.epsilon_of(a) - 0.23565786983497933) <= 1e-15


def test_spec_validation():
    with pytest.raises(ValueError, match="divide"):
        synth.SynthSpec(n=8, b=3, sigma=0.1, seed=0)
    with pytest.raises(ValueError, match="sigma"):
        synth.SynthSpec(n=8, b=2, sigma=-0.1, seed=0)
    with pytest.raises(ValueError, match="storage"):
        synth.SynthSpec(n=8, b=2, sigma=0.1, seed=0, storage="dense")
