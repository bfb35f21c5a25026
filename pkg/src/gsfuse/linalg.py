"""Matrix-function toolkit on the special orthogonal group.

Everything here works on plain float64 numpy arrays. Skew-symmetric
generators are kept *exactly* antisymmetric as stored (the lower triangle
is the negated mirror of the upper, the diagonal is zero); orthogonal
blocks are validated against an explicit tolerance, never silently
repaired. Matrix log/exp/power are computed through the real Schur
canonical form: a special orthogonal matrix is orthogonally similar to a
direct sum of 2x2 plane rotations and 1x1 identity entries, so scalar
functions act on rotation angles and the results are structurally skew
or orthogonal without complex arithmetic.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

# Default guard half-width around the -1 eigenvalue, in radians of phase.
GUARD_DELTA = 1e-6
# Frobenius tolerance for membership checks on inputs claimed orthogonal.
ORTHO_INPUT_TOL = 1e-8
# Stricter per-block validation tolerance (dims up through 64).
ORTHO_VALIDATE_TOL = 1e-10
DET_TOL = 1e-8


class OrthogonalityError(ValueError):
    """Input fails the orthogonality (or SO membership) tolerance."""


class EigenvalueNearMinusOne(ValueError):
    """An eigenphase sits within the guard width of +-pi, so the
    principal logarithm (and any merge built on it) is undefined."""


class PhaseOverflow(ValueError):
    """A scaled eigenphase would leave the principal branch (-pi, pi)."""


def frobenius(M: np.ndarray) -> float:
    return float(np.linalg.norm(M))


def orthogonality_residual(B: np.ndarray) -> float:
    """||B^T B - I||_F, the quantity all orthogonality tolerances bound."""
    dim = B.shape[0]
    return float(np.linalg.norm(B.T @ B - np.eye(dim)))


def require_orthogonal(B: np.ndarray, tol: float = ORTHO_INPUT_TOL) -> None:
    B = np.asarray(B)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise OrthogonalityError(f"expected a square matrix, got shape {B.shape}")
    res = orthogonality_residual(B)
    if not np.isfinite(res) or res > tol:
        raise OrthogonalityError(
            f"orthogonality residual {res:.3e} exceeds tolerance {tol:.1e}"
        )


def skew_part(M: np.ndarray) -> np.ndarray:
    """Antisymmetric part (M - M^T)/2 with exact skew storage.

    IEEE negation is exact, so the result satisfies K^T == -K bitwise.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"skew_part needs a square matrix, got shape {M.shape}")
    return 0.5 * (M - M.T)


def _require_skew(K: np.ndarray) -> np.ndarray:
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"expected a square generator, got shape {K.shape}")
    slack = np.abs(K + K.T).max() if K.size else 0.0
    if slack > 1e-12 * (1.0 + np.abs(K).max()):
        raise ValueError(f"generator is not skew-symmetric (|K + K^T| up to {slack:.3e})")
    # exact storage even if the caller's copy carried roundoff
    return 0.5 * (K - K.T)


def cayley(K: np.ndarray) -> np.ndarray:
    """Cayley transform (I - K)^-1 (I + K) of a skew-symmetric K.

    The image is special orthogonal for every real skew K; I - K is
    always invertible because the spectrum of K is purely imaginary.
    """
    K = _require_skew(K)
    I = np.eye(K.shape[0])
    try:
        return np.linalg.solve(I - K, I + K)
    except np.linalg.LinAlgError as exc:  # unreachable for genuinely skew input
        raise np.linalg.LinAlgError(
            f"Cayley solve broke down (||K||_2 = {np.linalg.norm(K, 2):.3e}): {exc}"
        ) from exc


def inverse_cayley(B: np.ndarray, delta: float = GUARD_DELTA) -> np.ndarray:
    """Skew generator K with cayley(K) = B, i.e. K = (B - I)(B + I)^-1.

    Guarded: every eigenphase of B must stay `delta` radians away from
    +-pi, otherwise B + I is (near) singular and the parametrization has
    no principal representative.
    """
    require_orthogonal(B)
    _guard_phases(_orthogonal_phases(B), delta)
    I = np.eye(B.shape[0])
    K = np.linalg.solve((B + I).T, (B - I).T).T
    return skew_part(K)


# ---------------------------------------------------------------------------
# real canonical form plumbing

def _segments(T: np.ndarray) -> list[tuple[int, int]]:
    """Diagonal segmentation (offset, size) of a real quasi-triangular T.

    LAPACK writes exact zeros on the subdiagonal except under the 2x2
    blocks of complex-conjugate pairs; the comparison is scaled anyway.
    """
    n = T.shape[0]
    segs = []
    i = 0
    eps = np.finfo(float).eps
    while i < n:
        if i + 1 < n and abs(T[i + 1, i]) > eps * (abs(T[i, i]) + abs(T[i + 1, i + 1])):
            segs.append((i, 2))
            i += 2
        else:
            segs.append((i, 1))
            i += 1
    return segs


def _orthogonal_frame(B: np.ndarray) -> tuple[np.ndarray, list[tuple[int, int, float]]]:
    """Real Schur frame of an orthogonal B: Z and (offset, size, phase) triplets.

    2x2 segments carry a rotation angle in (-pi, pi); 1x1 segments carry
    phase 0 for eigenvalue +1 and pi for eigenvalue -1.
    """
    T, Z = scipy.linalg.schur(B, output="real")
    triplets = []
    for off, size in _segments(T):
        if size == 2:
            c = 0.5 * (T[off, off] + T[off + 1, off + 1])
            s = 0.5 * (T[off + 1, off] - T[off, off + 1])
            triplets.append((off, 2, float(np.arctan2(s, c))))
        else:
            triplets.append((off, 1, 0.0 if T[off, off] > 0.0 else np.pi))
    return Z, triplets


def _orthogonal_phases(B: np.ndarray) -> np.ndarray:
    _, triplets = _orthogonal_frame(B)
    return np.array([abs(phi) for _, _, phi in triplets])


def _guard_phases(abs_phases: np.ndarray, delta: float) -> None:
    if abs_phases.size == 0:
        return
    margin = np.pi - abs_phases.max()
    if margin <= delta:
        raise EigenvalueNearMinusOne(
            f"eigenphase within {margin:.3e} rad of pi (guard width {delta:.1e})"
        )


def _rebuild_orthogonal(Z, triplets, scale: float) -> np.ndarray:
    """Z . blockdiag(R(scale*phi) | 1) . Z^T for the frame's segments."""
    n = Z.shape[0]
    G = np.zeros((n, n))
    for off, size, phi in triplets:
        if size == 1:
            G[off, off] = 1.0
        else:
            c, s = np.cos(scale * phi), np.sin(scale * phi)
            G[off:off + 2, off:off + 2] = [[c, -s], [s, c]]
    return Z @ G @ Z.T


def so_log(B: np.ndarray, delta: float = GUARD_DELTA) -> np.ndarray:
    """Principal logarithm of a special orthogonal matrix, exactly skew.

    Errors with EigenvalueNearMinusOne when any eigenphase comes within
    `delta` of +-pi, where the principal branch is undefined.
    """
    require_orthogonal(B)
    Z, triplets = _orthogonal_frame(B)
    _guard_phases(np.array([abs(phi) for _, _, phi in triplets]), delta)
    n = B.shape[0]
    S = np.zeros((n, n))
    for off, size, phi in triplets:
        if size == 2:
            S[off, off + 1] = -phi
            S[off + 1, off] = phi
    return skew_part(Z @ S @ Z.T)


def so_exp(K: np.ndarray) -> np.ndarray:
    """Exponential of a skew-symmetric matrix; lands in SO(dim).

    Uses the real Schur form of K (2x2 segments hold +-i*omega pairs,
    their tiny real parts are discarded) and rebuilds plane rotations,
    so the output is orthogonal by construction up to roundoff.
    """
    K = _require_skew(K)
    if not K.any():
        return np.eye(K.shape[0])
    T, Z = scipy.linalg.schur(K, output="real")
    triplets = []
    for off, size in _segments(T):
        if size == 2:
            omega = 0.5 * (T[off + 1, off] - T[off, off + 1])
            triplets.append((off, 2, float(omega)))
        else:
            triplets.append((off, 1, 0.0))
    return _rebuild_orthogonal(Z, triplets, 1.0)


def so_power(B: np.ndarray, s: float, delta: float = GUARD_DELTA) -> np.ndarray:
    """Fractional power exp(s * log B): every eigenphase scales by s.

    Requires the so_log guard on B itself, and raises PhaseOverflow if
    any |s * phi| would reach the branch boundary pi - delta.
    """
    require_orthogonal(B)
    Z, triplets = _orthogonal_frame(B)
    phases = np.array([abs(phi) for _, _, phi in triplets])
    _guard_phases(phases, delta)
    if phases.size and abs(s) * phases.max() >= np.pi - delta:
        raise PhaseOverflow(
            f"|s * phi| = {abs(s) * phases.max():.6f} reaches the principal "
            f"branch boundary pi - {delta:.1e}"
        )
    return _rebuild_orthogonal(Z, triplets, float(s))


def phase_spectrum(B: np.ndarray, tol: float = ORTHO_INPUT_TOL) -> np.ndarray:
    """Eigenvalue phases of an orthogonal block, in radians.

    Conjugate pairs appear as +-phi, eigenvalue +1 as 0, eigenvalue -1
    as pi (so a -1 pair breaks the usual sum-to-zero cancellation; the
    guard keeps merge inputs away from that boundary). Sorted by
    descending |phi|, positive phase first on ties.
    """
    require_orthogonal(B, tol)
    _, triplets = _orthogonal_frame(B)
    phases: list[float] = []
    for _, size, phi in triplets:
        if size == 2:
            phases.extend((abs(phi), -abs(phi)))
        else:
            phases.append(phi)
    phases.sort(key=lambda p: (-abs(p), -np.sign(p)))
    return np.array(phases)


def reorthogonalize(B: np.ndarray) -> np.ndarray:
    """Polar projection onto SO(dim) -- the explicit, opt-in repair.

    Never applied silently anywhere in the package. Raises if the
    nearest orthogonal matrix has determinant -1 (the input was not a
    drifted rotation to begin with).
    """
    B = np.asarray(B, dtype=float)
    U, _, Vt = np.linalg.svd(B)
    Q = U @ Vt
    if np.linalg.det(Q) < 0.0:
        raise OrthogonalityError("nearest orthogonal matrix is a reflection, not in SO")
    return Q
