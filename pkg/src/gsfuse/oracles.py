"""Small dense oracles used only by tests.

Every routine here recomputes its answer through a route disjoint from
the production code it checks: dense permutation matrices instead of
gathers, scipy's logm/expm instead of the Schur rebuilds, a truncated
Taylor series instead of the canonical-form exponential, complex
eigendecomposition instead of real 2x2 segments, and closed-form plane
rotation angles for the b = 2 cases. Sizes are hard-capped by a budget
because the dense eigenroutines scale cubically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .linalg import EigenvalueNearMinusOne, GUARD_DELTA
from .structure import GSAdapter


class OracleBudgetExceeded(ValueError):
    """An oracle was asked for a size it is not validated (or fast) at."""


@dataclass(frozen=True)
class OracleBudget:
    max_n: int = 16
    max_terms: int = 30


DEFAULT_BUDGET = OracleBudget()


def rotation(angle: float) -> np.ndarray:
    """Plane rotation [[c, -s], [s, c]]."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def shuffle_matrix(b: int, n: int) -> np.ndarray:
    """Dense perfect-shuffle matrix, built from the definitional action.

    Column j is the reshape(b x n/b)-transpose-flatten image of e_j, so
    this route never touches the production index maps.
    """
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        cols.append(e.reshape(b, n // b).T.ravel())
    return np.column_stack(cols)


def _dense_blockdiag(blocks, storage: str) -> np.ndarray:
    mats = []
    for blk in blocks:
        if storage == "cayley":
            I = np.eye(blk.shape[0])
            mats.append(np.linalg.solve(I - blk, I + blk))
        else:
            mats.append(blk)
    return scipy.linalg.block_diag(*mats)


def dense_assembly(adapter: GSAdapter) -> np.ndarray:
    """Brute-force P^T L P R with explicit matrix-matrix products."""
    P = shuffle_matrix(adapter.b, adapter.n)
    L = _dense_blockdiag(adapter.left.blocks, adapter.left.storage)
    R = _dense_blockdiag(adapter.right.blocks, adapter.right.storage)
    return P.T @ L @ P @ R


def ambient_geodesic(concept: GSAdapter, style: GSAdapter, t: float,
                     budget: OracleBudget = DEFAULT_BUDGET,
                     delta: float = GUARD_DELTA) -> np.ndarray:
    """Dense geodesic A_C exp(-t log(A_S^T A_C)) on the full n x n matrices.

    The reference curve the blockwise merge is compared against; scipy's
    logm/expm do the matrix functions, so no production code is involved.
    """
    if concept.n > budget.max_n:
        raise OracleBudgetExceeded(
            f"dense geodesic capped at n = {budget.max_n}, got {concept.n}"
        )
    A_C = dense_assembly(concept)
    A_S = dense_assembly(style)
    M = A_S.T @ A_C
    phases = np.abs(np.angle(np.linalg.eigvals(M)))
    if phases.size and np.pi - phases.max() <= delta:
        raise EigenvalueNearMinusOne(
            f"dense product has an eigenphase within {np.pi - phases.max():.3e} of pi"
        )
    log_M = np.real(scipy.linalg.logm(M))
    return A_C @ np.real(scipy.linalg.expm(-t * log_M))


def svd_optimum(T: np.ndarray, r: int) -> float:
    """Optimal rank-r residual sum_{i>r} sigma_i(T)^2 (Eckart-Young)."""
    T = np.asarray(T, dtype=float)
    if not 1 <= r <= min(T.shape):
        raise ValueError(f"rank {r} out of range for shape {T.shape}")
    sigma = np.linalg.svd(T, compute_uv=False)
    return float(np.sum(sigma[r:] ** 2))


def series_exp(K: np.ndarray, terms: int = 30,
               budget: OracleBudget = DEFAULT_BUDGET) -> np.ndarray:
    """Truncated Taylor sum for exp(K); accurate to ~1e-13 at ||K||_2 <= 0.5."""
    K = np.asarray(K, dtype=float)
    if terms > budget.max_terms:
        raise OracleBudgetExceeded(f"series capped at {budget.max_terms} terms")
    if np.linalg.norm(K, 2) > 1.0:
        raise OracleBudgetExceeded("series oracle requires ||K||_2 <= 1")
    out = np.eye(K.shape[0])
    term = np.eye(K.shape[0])
    for j in range(1, terms + 1):
        term = term @ K / j
        out = out + term
    return out


def eig_log(B: np.ndarray, budget: OracleBudget = DEFAULT_BUDGET) -> np.ndarray:
    """Principal log via complex eigendecomposition, projected back to skew."""
    if B.shape[0] > budget.max_n:
        raise OracleBudgetExceeded(f"eig oracle capped at n = {budget.max_n}")
    w, V = np.linalg.eig(B)
    K = (V @ np.diag(np.log(w)) @ np.linalg.inv(V)).real
    return 0.5 * (K - K.T)


def eig_power(B: np.ndarray, s: float,
              budget: OracleBudget = DEFAULT_BUDGET) -> np.ndarray:
    """B^s via complex eigendecomposition (principal branch)."""
    if B.shape[0] > budget.max_n:
        raise OracleBudgetExceeded(f"eig oracle capped at n = {budget.max_n}")
    w, V = np.linalg.eig(B)
    return (V @ np.diag(np.exp(s * np.log(w))) @ np.linalg.inv(V)).real


def merged_angle(theta_c: float, theta_s: float, t: float, eta0: float) -> float:
    """Closed-form output angle of the restore merge on 2 x 2 blocks.

    Interpolate the angle, then push it through the restoration map
    phi -> 2 arctan(eta(t) sin(phi) / 2).
    """
    phi = (1.0 - t) * theta_c + t * theta_s
    eta = 1.0 + 4.0 * (eta0 - 1.0) * t * (1.0 - t)
    return 2.0 * np.arctan(eta * np.sin(phi) / 2.0)
