"""Group-and-shuffle orthogonal adapters.

An adapter on dimension n with block size b is A = P^T L P R, where L and
R are block-diagonal with n/b orthogonal b x b blocks and P is the perfect
shuffle that reshapes a length-n vector into b rows of n/b entries and
reads it back column-wise. Permutations live as index maps and act by
gather; dense permutation matrices exist only for test oracles. Factors
can be stored either as materialized orthogonal blocks or as the skew
Cayley generators that produce them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import linalg

CONVENTION = "PL=PT,PR=I"

ORTHOGONAL = "orthogonal"
CAYLEY = "cayley"


@dataclass(frozen=True, eq=False)
class PerfectShuffle:
    """Index-map form of the shuffle P_(b,n): (P x)[i] = x[forward[i]]."""

    b: int
    n: int
    forward: np.ndarray
    inverse: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        return x[self.forward]

    def apply_inverse(self, x: np.ndarray) -> np.ndarray:
        return x[self.inverse]

    def conjugate(self, M: np.ndarray) -> np.ndarray:
        """P M P^T as a pure entry gather."""
        return M[np.ix_(self.forward, self.forward)]

    def conjugate_transpose(self, M: np.ndarray) -> np.ndarray:
        """P^T M P as a pure entry gather."""
        return M[np.ix_(self.inverse, self.inverse)]

    def as_matrix(self) -> np.ndarray:
        # dense form, for oracles and serialization metadata only
        return np.eye(self.n)[self.forward, :]


def perfect_shuffle(b: int, n: int) -> PerfectShuffle:
    """Shuffle that reshapes to b x (n/b) row-major, transposes, flattens.

    b = 1 (and b = n) give the identity map.
    """
    if b < 1 or n < 1 or n % b != 0:
        raise ValueError(f"block size {b} must divide dimension {n}")
    forward = np.arange(n).reshape(b, n // b).T.ravel()
    return PerfectShuffle(b=b, n=n, forward=forward, inverse=np.argsort(forward))


def kron(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kronecker product with row-major block layout ((p,q)x(r,s) -> (pr,qs))."""
    return np.kron(np.asarray(A), np.asarray(B))


@dataclass(frozen=True, eq=False)
class BlockDiagonalFactor:
    """One of the two block-diagonal factors, with tagged storage.

    In "orthogonal" storage each block is a b x b special orthogonal
    matrix; in "cayley" storage each block is the skew generator whose
    Cayley transform is the orthogonal block.
    """

    blocks: tuple[np.ndarray, ...]
    storage: str = ORTHOGONAL

    def __post_init__(self):
        if self.storage not in (ORTHOGONAL, CAYLEY):
            raise ValueError(f"unknown storage tag {self.storage!r}")
        if not self.blocks:
            raise ValueError("a factor needs at least one block")
        b = self.blocks[0].shape[0]
        for i, blk in enumerate(self.blocks):
            if blk.shape != (b, b):
                raise ValueError(f"block {i} has shape {blk.shape}, expected ({b}, {b})")

    @property
    def b(self) -> int:
        return self.blocks[0].shape[0]

    @property
    def k(self) -> int:
        return len(self.blocks)

    def materialized(self) -> "BlockDiagonalFactor":
        """Orthogonal-storage view, applying the Cayley map if needed."""
        if self.storage == ORTHOGONAL:
            return self
        return BlockDiagonalFactor(
            blocks=tuple(linalg.cayley(K) for K in self.blocks), storage=ORTHOGONAL
        )

    def dense(self) -> np.ndarray:
        return scipy.linalg.block_diag(*self.materialized().blocks)


def identity_factor(n: int, b: int) -> BlockDiagonalFactor:
    if n % b != 0:
        raise ValueError(f"block size {b} must divide dimension {n}")
    return BlockDiagonalFactor(blocks=tuple(np.eye(b) for _ in range(n // b)))


@dataclass(frozen=True, eq=False)
class GSAdapter:
    n: int
    b: int
    left: BlockDiagonalFactor
    right: BlockDiagonalFactor
    perm: PerfectShuffle
    convention: str = CONVENTION
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n % self.b != 0:
            raise ValueError(f"block size {self.b} must divide dimension {self.n}")
        k = self.n // self.b
        for name, factor in (("left", self.left), ("right", self.right)):
            if factor.b != self.b or factor.k != k:
                raise ValueError(
                    f"{name} factor is {factor.k} blocks of size {factor.b}, "
                    f"expected {k} of size {self.b}"
                )
        if (self.perm.b, self.perm.n) != (self.b, self.n):
            raise ValueError("permutation does not match adapter shape")
        if self.convention != CONVENTION:
            raise ValueError(f"unsupported permutation convention {self.convention!r}")

    @property
    def k(self) -> int:
        return self.n // self.b


def make_adapter(left: BlockDiagonalFactor, right: BlockDiagonalFactor,
                 metadata: dict | None = None) -> GSAdapter:
    """Adapter from two compatible factors under the fixed convention."""
    b, n = left.b, left.b * left.k
    return GSAdapter(n=n, b=b, left=left, right=right,
                     perm=perfect_shuffle(b, n), metadata=dict(metadata or {}))


def identity_adapter(n: int, b: int) -> GSAdapter:
    return make_adapter(identity_factor(n, b), identity_factor(n, b))


def assemble_dense(adapter: GSAdapter) -> np.ndarray:
    """Dense n x n matrix P^T L P R (Cayley storage is materialized first)."""
    L = adapter.left.dense()
    R = adapter.right.dense()
    return adapter.perm.conjugate_transpose(L) @ R


def apply_to_weights(adapter: GSAdapter, W: np.ndarray) -> np.ndarray:
    """Rotate a weight matrix: W -> A W. Preserves Frobenius and spectral norms."""
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != adapter.n:
        raise ValueError(f"weights have shape {W.shape}, expected {adapter.n} rows")
    return assemble_dense(adapter) @ W


@dataclass(frozen=True, eq=False)
class ValidationReport:
    passed: bool
    epsilon: float
    left_residuals: tuple[float, ...]
    right_residuals: tuple[float, ...]
    left_det_errors: tuple[float, ...]
    right_det_errors: tuple[float, ...]
    permutation_ok: bool
    failures: tuple[str, ...]

    def summary(self) -> str:
        verdict = "pass" if self.passed else "fail"
        lines = [
            f"validation: {verdict}",
            f"  epsilon (max ||B_i - I||_2): {self.epsilon:.6e}",
            f"  max orthogonality residual: "
            f"{max(self.left_residuals + self.right_residuals):.3e}",
        ]
        lines.extend(f"  {msg}" for msg in self.failures)
        return "\n".join(lines)


def validate(adapter: GSAdapter,
             ortho_tol: float = linalg.ORTHO_VALIDATE_TOL,
             det_tol: float = linalg.DET_TOL) -> ValidationReport:
    """Per-block orthogonality, determinant, and permutation-consistency report.

    epsilon is max_i ||B_i - I||_2 over the materialized blocks of both
    factors, the deviation scale the merge error analysis is phrased in.
    """
    failures: list[str] = []
    residuals: dict[str, list[float]] = {}
    det_errors: dict[str, list[float]] = {}
    epsilon = 0.0
    for name, factor in (("left", adapter.left), ("right", adapter.right)):
        residuals[name] = []
        det_errors[name] = []
        for i, blk in enumerate(factor.materialized().blocks):
            res = linalg.orthogonality_residual(blk)
            det_err = abs(np.linalg.det(blk) - 1.0)
            residuals[name].append(res)
            det_errors[name].append(det_err)
            epsilon = max(epsilon, float(np.linalg.norm(blk - np.eye(adapter.b), 2)))
            if not np.isfinite(res) or res > ortho_tol:
                failures.append(f"{name} block {i}: orthogonality residual {res:.3e}")
            if not np.isfinite(det_err) or det_err > det_tol:
                failures.append(f"{name} block {i}: determinant off by {det_err:.3e}")
    ref = perfect_shuffle(adapter.b, adapter.n)
    perm_ok = (
        np.array_equal(adapter.perm.forward, ref.forward)
        and np.array_equal(adapter.perm.inverse, np.argsort(adapter.perm.forward))
    )
    if not perm_ok:
        failures.append("permutation is not the perfect shuffle for (b, n)")
    return ValidationReport(
        passed=not failures,
        epsilon=epsilon,
        left_residuals=tuple(residuals["left"]),
        right_residuals=tuple(residuals["right"]),
        left_det_errors=tuple(det_errors["left"]),
        right_det_errors=tuple(det_errors["right"]),
        permutation_ok=perm_ok,
        failures=tuple(failures),
    )
