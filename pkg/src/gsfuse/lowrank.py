"""Fixed-rank merging baseline via alternating least squares.

The merged adapter minimizes a weighted Frobenius objective over the
rank-r manifold. Since the objective equals ||X - T||_F^2 plus a
constant, where T is the weighted average of the inputs, the global
optimum is the truncated SVD of T; ALS reaches it by alternating
orthonormal-projection steps on U and V. Deliberately dense and simple:
this is the comparison point for the orthogonal merge, not a production
path for big models.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

WEIGHT_SLACK = 1e-12
MONOTONE_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class LowRankFactors:
    """Rank-r factorization X = U V^T with U (n, r) and V (m, r)."""

    n: int
    m: int
    r: int
    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        if not 1 <= self.r <= min(self.n, self.m):
            raise ValueError(f"rank {self.r} out of range for ({self.n}, {self.m})")
        if self.U.shape != (self.n, self.r):
            raise ValueError(f"U has shape {self.U.shape}, expected ({self.n}, {self.r})")
        if self.V.shape != (self.m, self.r):
            raise ValueError(f"V has shape {self.V.shape}, expected ({self.m}, {self.r})")
        if not (np.all(np.isfinite(self.U)) and np.all(np.isfinite(self.V))):
            raise ValueError("factors must be finite")

    def dense(self) -> np.ndarray:
        return self.U @ self.V.T


@dataclass(frozen=True, eq=False)
class AlsTrace:
    iterations: tuple[float, ...]
    converged: bool
    factors: LowRankFactors
    pivoted: bool


def _check_same_shape(factors: list[LowRankFactors]) -> tuple[int, int, int]:
    n, m, r = factors[0].n, factors[0].m, factors[0].r
    for i, f in enumerate(factors[1:], start=1):
        if (f.n, f.m, f.r) != (n, m, r):
            raise ValueError(
                f"adapter {i} has shape (n={f.n}, m={f.m}, r={f.r}), "
                f"expected (n={n}, m={m}, r={r})"
            )
    return n, m, r


def als_objective(X: LowRankFactors, X_C: LowRankFactors, X_S: LowRankFactors,
                  t: float) -> float:
    """(1-t)||X - X_C||_F^2 + t||X - X_S||_F^2."""
    _check_same_shape([X_C, X_S])
    if X.n != X_C.n or X.m != X_C.m:
        raise ValueError(f"candidate shape ({X.n}, {X.m}) does not match inputs")
    dense = X.dense()
    return float((1.0 - t) * np.sum((dense - X_C.dense()) ** 2)
                 + t * np.sum((dense - X_S.dense()) ** 2))


def _orthonormal_basis(M: np.ndarray) -> tuple[np.ndarray, bool]:
    """Reduced-QR basis; falls back to column pivoting when rank-deficient."""
    Q, R = np.linalg.qr(M)
    diag = np.abs(np.diag(R))
    if diag.size and diag.min() > 1e-12 * max(diag.max(), 1.0):
        return Q, False
    Q, _, _ = scipy.linalg.qr(M, mode="economic", pivoting=True)
    return Q[:, : M.shape[1]], True


def multi_als_merge(weighted: list[tuple[LowRankFactors, float]],
                    max_iters: int = 200, tol: float = 1e-10,
                    init: str = "warm",
                    rng: np.random.Generator | None = None) -> AlsTrace:
    """ALS toward the weighted average of any number of low-rank adapters.

    Weights must be non-negative and sum to one. The warm start takes
    the first adapter's U; init="random" draws an orthonormal U instead
    (used by the multi-seed optimum tests).
    """
    if not weighted:
        raise ValueError("need at least one adapter")
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    factors = [f for f, _ in weighted]
    weights = np.array([w for _, w in weighted], dtype=float)
    if np.any(weights < 0.0) or abs(weights.sum() - 1.0) > WEIGHT_SLACK:
        raise ValueError(f"weights must be >= 0 and sum to 1, got {weights.tolist()}")
    n, m, r = _check_same_shape(factors)

    denses = [f.dense() for f in factors]
    T = sum(w * d for w, d in zip(weights, denses))

    if init == "warm":
        U = factors[0].U.copy()
    elif init == "random":
        if rng is None:
            raise ValueError('init="random" needs an rng')
        U, _ = np.linalg.qr(rng.normal(size=(n, r)))
    else:
        raise ValueError(f"unknown init {init!r}")

    def objective(U_cur, V_cur):
        X = U_cur @ V_cur.T
        return float(sum(w * np.sum((X - d) ** 2) for w, d in zip(weights, denses)))

    pivoted = False
    history: list[float] = []
    converged = False
    for _ in range(max_iters):
        Q_U, p1 = _orthonormal_basis(U)
        V = T.T @ Q_U          # candidate is Q_U V^T
        Q_V, p2 = _orthonormal_basis(V)
        U = T @ Q_V            # candidate is U Q_V^T
        pivoted = pivoted or p1 or p2
        history.append(objective(U, Q_V))
        if len(history) >= 2:
            prev, cur = history[-2], history[-1]
            if cur > prev + MONOTONE_SLACK:
                raise ArithmeticError(
                    f"ALS objective increased from {prev:.6e} to {cur:.6e}"
                )
            if prev - cur < tol * max(prev, 1e-30):
                converged = True
                break

    Q_U, p1 = _orthonormal_basis(U)
    pivoted = pivoted or p1
    V = T.T @ Q_U
    final = LowRankFactors(n=n, m=m, r=r, U=Q_U, V=V)
    return AlsTrace(iterations=tuple(history), converged=converged,
                    factors=final, pivoted=pivoted)


def als_merge(X_C: LowRankFactors, X_S: LowRankFactors, t: float,
              max_iters: int = 200, tol: float = 1e-10,
              init: str = "warm",
              rng: np.random.Generator | None = None) -> AlsTrace:
    """Two-adapter merge: ALS toward T(t) = (1-t) X_C + t X_S."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    return multi_als_merge([(X_C, 1.0 - t), (X_S, t)],
                           max_iters=max_iters, tol=tol, init=init, rng=rng)
