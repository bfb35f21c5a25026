import numpy as np
import pytest

from gsfuse import linalg, oracles
from conftest import make_rng, random_skew, unit_spectral_skew

J = np.array([[0.0, -1.0], [1.0, 0.0]])


def test_skew_part_upper_example():
    K = linalg.skew_part(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert np.array_equal(K, np.array([[0.0, 0.5], [-0.5, 0.0]]))


@pytest.mark.parametrize("phi", [0.1, 0.7, 2.0])
def test_skew_part_of_rotation_is_sine(phi):
    K = linalg.skew_part(oracles.rotation(phi))
    assert np.allclose(K, np.sin(phi) * J, atol=1e-15)
    # exact antisymmetry as stored, not just within tolerance
    assert np.array_equal(K.T, -K)


def test_cayley_quarter_turn():
    B = linalg.cayley(J)
    assert np.allclose(B, np.array([[0.0, -1.0], [1.0, 0.0]]), atol=1e-15)


def test_cayley_half_generator():
    B = linalg.cayley(0.5 * J)
    assert np.allclose(B, np.array([[0.6, -0.8], [0.8, 0.6]]), atol=1e-15)


def test_cayley_rejects_non_skew():
    with pytest.raises(ValueError, match="skew"):
        linalg.cayley(np.array([[0.0, 1.0], [1.0, 0.0]]))


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
@pytest.mark.parametrize("dim", [2, 5, 8])
def test_cayley_round_trip(seed, dim):
    K = random_skew(make_rng((seed, dim)), dim, 0.2)
    B = linalg.cayley(K)
    assert linalg.orthogonality_residual(B) <= 1e-12
    K_back = linalg.inverse_cayley(B)
    assert np.linalg.norm(K_back - K) <= 1e-12 * (1.0 + np.linalg.norm(K))
    assert np.array_equal(K_back.T, -K_back)


def test_so_log_of_rotation():
    K = linalg.so_log(oracles.rotation(np.pi / 4))
    assert np.allclose(K, (np.pi / 4) * J, atol=1e-13)
    assert np.array_equal(K.T, -K)


def test_so_log_guard_near_half_turn():
    B = oracles.rotation(np.pi - 1e-9)
    with pytest.raises(linalg.EigenvalueNearMinusOne):
        linalg.so_log(B)


def test_so_log_guard_in_larger_matrix():
    # a single bad plane buried inside a 6x6 block must still trip the guard
    import scipy.linalg as sla
    B = sla.block_diag(oracles.rotation(0.3), oracles.rotation(np.pi - 1e-8), np.eye(2))
    with pytest.raises(linalg.EigenvalueNearMinusOne):
        linalg.so_log(B)


def test_so_log_rejects_non_orthogonal():
    with pytest.raises(linalg.OrthogonalityError):
        linalg.so_log(np.array([[1.0, 0.1], [0.0, 1.0]]))


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("norm", [0.3, 0.5])
def test_so_exp_matches_series_oracle(seed, norm):
    K = norm * unit_spectral_skew(make_rng((seed, 8)), 8)
    B = linalg.so_exp(K)
    assert linalg.orthogonality_residual(B) <= 1e-12
    assert np.linalg.norm(B - oracles.series_exp(K, terms=30)) <= 1e-13


def test_so_exp_zero_is_identity():
    assert np.array_equal(linalg.so_exp(np.zeros((4, 4))), np.eye(4))


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
@pytest.mark.parametrize("dim", [2, 4, 8])
def test_log_exp_round_trips(seed, dim):
    K = random_skew(make_rng((seed, dim, 1)), dim, 0.3)
    B = linalg.so_exp(K)
    assert np.linalg.norm(linalg.so_log(B) - K) <= 1e-11
    assert np.linalg.norm(linalg.so_exp(linalg.so_log(B)) - B) <= 1e-11


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("dim", [2, 4, 8])
def test_log_power_agree_with_eig_oracle(seed, dim):
    B = linalg.cayley(random_skew(make_rng((seed, dim, 2)), dim, 0.25))
    assert np.linalg.norm(linalg.so_log(B) - oracles.eig_log(B)) <= 1e-10
    for s in (0.3, 0.7, 1.8):
        assert np.linalg.norm(linalg.so_power(B, s) - oracles.eig_power(B, s)) <= 1e-10


def test_so_power_integer_cases(rng):
    B = linalg.cayley(random_skew(rng, 6, 0.2))
    assert np.linalg.norm(linalg.so_power(B, 1.0) - B) <= 1e-13
    assert np.linalg.norm(linalg.so_power(B, 0.0) - np.eye(6)) <= 1e-14
    assert np.linalg.norm(linalg.so_power(B, 2.0) - B @ B) <= 1e-13


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_so_power_scales_phases(seed):
    B = linalg.cayley(random_skew(make_rng((seed, 6, 3)), 6, 0.3))
    phases = linalg.phase_spectrum(B)
    for s in (0.25, 0.5, 1.5):
        scaled = linalg.phase_spectrum(linalg.so_power(B, s))
        assert np.linalg.norm(scaled - s * phases, np.inf) <= 1e-9


def test_so_power_overflow():
    # 1.6 * 2.0 = 3.2 rad would leave the principal branch
    with pytest.raises(linalg.PhaseOverflow):
        linalg.so_power(oracles.rotation(2.0), 1.6)


def test_so_power_guard_precedes_overflow():
    B = oracles.rotation(np.pi - 1e-9)
    with pytest.raises(linalg.EigenvalueNearMinusOne):
        linalg.so_power(B, 0.1)


def test_phase_spectrum_rotation_pair():
    assert np.allclose(linalg.phase_spectrum(oracles.rotation(0.3)),
                       [0.3, -0.3], atol=1e-14)


def test_phase_spectrum_identity_and_half_turn():
    assert np.array_equal(linalg.phase_spectrum(np.eye(3)), np.zeros(3))
    # -I in SO(2): two real -1 eigenvalues, reported as pi each
    assert np.allclose(linalg.phase_spectrum(-np.eye(2)), [np.pi, np.pi])


def test_phase_spectrum_sorted_and_balanced():
    import scipy.linalg as sla
    B = sla.block_diag(oracles.rotation(0.1), oracles.rotation(0.5))
    phases = linalg.phase_spectrum(B)
    assert np.allclose(phases, [0.5, -0.5, 0.1, -0.1], atol=1e-14)
    assert abs(phases.sum()) <= 1e-14


def test_log_minus_skew_part_scalar_value():
    # closed form sqrt(2)*|phi - sin(phi)| at phi = 0.1
    B = oracles.rotation(0.1)
    e = np.linalg.norm(linalg.so_log(B) - linalg.skew_part(B))
    assert abs(e - 0.00023558443732121857) <= 1e-12


def test_log_minus_skew_part_cubic_slope():
    # the defect of approximating log by the antisymmetric part is third order
    errs, gaps = [], []
    for eps in (0.02, 0.04, 0.08, 0.16):
        B = oracles.rotation(eps)
        errs.append(np.linalg.norm(linalg.so_log(B) - linalg.skew_part(B)))
        gaps.append(np.linalg.norm(B - np.eye(2), 2))
    slope = np.polyfit(np.log(gaps), np.log(errs), 1)[0]
    assert 2.7 <= slope <= 3.3


def test_reorthogonalize_projects_drift(rng):
    B = linalg.cayley(random_skew(rng, 5, 0.2))
    drifted = B + 1e-6 * rng.normal(size=(5, 5))
    Q = linalg.reorthogonalize(drifted)
    assert linalg.orthogonality_residual(Q) <= 1e-13
    assert np.linalg.norm(Q - B) <= 1e-5


def test_reorthogonalize_rejects_reflection():
    with pytest.raises(linalg.OrthogonalityError):
        linalg.reorthogonalize(np.diag([1.0, -1.0]))


def test_require_orthogonal_messages():
    with pytest.raises(linalg.OrthogonalityError, match="residual"):
        linalg.require_orthogonal(np.array([[1.0, 0.0], [0.0, 1.1]]))
    with pytest.raises(linalg.OrthogonalityError, match="square"):
        linalg.require_orthogonal(np.ones((2, 3)))
