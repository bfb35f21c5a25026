"""Training-free merging of two adapters, block by block.

The merge interpolates each pair of orthogonal blocks along their
geodesic, then re-widens the eigenphases that interpolation compressed:
restoration multiplies every phase by the schedule value eta(t), applied
either exactly through the matrix power (reference) or through a single
Cayley solve (production, third-order accurate). A fast variant skips
the geodesic entirely and interpolates the skew Cayley generators. All
variants keep every output block exactly in the orthogonal storage mode.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .geodesic import block_geodesic
from .structure import (
    CAYLEY,
    ORTHOGONAL,
    BlockDiagonalFactor,
    GSAdapter,
    assemble_dense,
    make_adapter,
)

DEFAULT_T = 0.6
DEFAULT_ETA0 = 2.0


class IncompatibleAdapters(ValueError):
    """The two adapters do not share shape or permutation convention."""


@dataclass(frozen=True)
class EtaSchedule:
    """Quadratic phase multiplier with eta(0) = eta(1) = 1, eta(1/2) = eta0."""

    eta0: float = DEFAULT_ETA0

    def __post_init__(self):
        if not np.isfinite(self.eta0) or self.eta0 < 0.0:
            raise ValueError(f"eta0 must be finite and >= 0, got {self.eta0}")


def eta_at(schedule: EtaSchedule, t: float) -> float:
    return 1.0 + 4.0 * (schedule.eta0 - 1.0) * t * (1.0 - t)


class MergeMethod(enum.Enum):
    """Closed set of merge strategies (values double as CLI names)."""

    GEODESIC = "geodesic"
    FULL = "full"
    FAST = "fast"
    MULTIPLY = "multiply"
    EXACT = "exact"


@dataclass(frozen=True)
class MergeConfig:
    t: float = DEFAULT_T
    eta: EtaSchedule = field(default_factory=EtaSchedule)
    method: MergeMethod = MergeMethod.FULL
    delta: float = linalg.GUARD_DELTA

    def __post_init__(self):
        if not np.isfinite(self.t):
            raise ValueError(f"fusion parameter t must be finite, got {self.t}")
        if self.delta <= 0.0:
            raise ValueError(f"guard width must be positive, got {self.delta}")


def _restore_with_coefficient(B: np.ndarray, coeff: float) -> np.ndarray:
    """(I - c(B - B^T))^-1 (I + c(B - B^T)): a Cayley image, hence orthogonal."""
    # B - B^T is exactly antisymmetric in IEEE arithmetic, so S is a
    # valid generator without any projection
    S = coeff * (B - B.T)
    I = np.eye(B.shape[0])
    try:
        return np.linalg.solve(I - S, I + S)
    except np.linalg.LinAlgError as exc:
        gap = np.linalg.norm(B - np.eye(B.shape[0]), 2)
        raise np.linalg.LinAlgError(
            f"restoration solve broke down; ||B - I||_2 = {gap:.3e}"
        ) from exc


def spectra_restore(B_t: np.ndarray, t: float,
                    schedule: EtaSchedule = EtaSchedule()) -> np.ndarray:
    """Approximate phase widening: Cayley transform of (eta(t)/4)(B - B^T).

    Agrees with the exact power rotate_exact(B, t) up to third order in
    ||B - I||_2 and needs one linear solve instead of an eigensplit.
    """
    return _restore_with_coefficient(B_t, eta_at(schedule, t) / 4.0)


def rotate_exact(B_t: np.ndarray, t: float,
                 schedule: EtaSchedule = EtaSchedule(),
                 delta: float = linalg.GUARD_DELTA) -> np.ndarray:
    """Exact phase widening B^eta(t), the reference the fast path is checked against."""
    return linalg.so_power(B_t, eta_at(schedule, t), delta=delta)


def merge_blocks_full(B_C: np.ndarray, B_S: np.ndarray,
                      cfg: MergeConfig = MergeConfig()) -> np.ndarray:
    """Geodesic interpolation followed by the configured restoration."""
    B = block_geodesic(B_C, B_S, cfg.t, delta=cfg.delta)
    if cfg.method is MergeMethod.GEODESIC:
        return B
    if cfg.method is MergeMethod.EXACT:
        return rotate_exact(B, cfg.t, cfg.eta, delta=cfg.delta)
    if cfg.method is MergeMethod.FULL:
        return spectra_restore(B, cfg.t, cfg.eta)
    raise ValueError(f"method {cfg.method} does not merge materialized block pairs")


def merge_blocks_fast(D_C: np.ndarray, D_S: np.ndarray,
                      cfg: MergeConfig = MergeConfig()) -> np.ndarray:
    """Interpolate skew generators, one Cayley solve, then restoration.

    t = 0 weights the concept generator fully; the lerp (1-t) D_C + t D_S
    keeps the endpoint semantics of the geodesic. Third-order close to
    merge_blocks_full in the larger of the two generator norms.
    """
    if not (np.all(np.isfinite(D_C)) and np.all(np.isfinite(D_S))):
        raise ValueError("generators must be finite")
    D_merge = (1.0 - cfg.t) * np.asarray(D_C) + cfg.t * np.asarray(D_S)
    # defensive: exact for valid generators, repairs drifted storage
    B = linalg.cayley(linalg.skew_part(D_merge))
    return spectra_restore(B, cfg.t, cfg.eta)


def _merged_metadata(A_C: GSAdapter, A_S: GSAdapter) -> dict:
    # carrying metadata only makes sense when the inputs agree on it,
    # which also keeps a self-merge byte-identical on disk
    return dict(A_C.metadata) if A_C.metadata == A_S.metadata else {}


def _check_compatible(A_C: GSAdapter, A_S: GSAdapter) -> None:
    if (A_C.n, A_C.b) != (A_S.n, A_S.b):
        raise IncompatibleAdapters(
            f"shape mismatch: (n={A_C.n}, b={A_C.b}) vs (n={A_S.n}, b={A_S.b})"
        )
    if A_C.convention != A_S.convention:
        raise IncompatibleAdapters(
            f"convention mismatch: {A_C.convention!r} vs {A_S.convention!r}"
        )


def _merge_factor(name: str, F_C: BlockDiagonalFactor, F_S: BlockDiagonalFactor,
                  cfg: MergeConfig) -> BlockDiagonalFactor:
    blocks = []
    if cfg.method is MergeMethod.FAST:
        gen_C = F_C.blocks if F_C.storage == CAYLEY else tuple(
            linalg.inverse_cayley(B, delta=cfg.delta) for B in F_C.materialized().blocks)
        gen_S = F_S.blocks if F_S.storage == CAYLEY else tuple(
            linalg.inverse_cayley(B, delta=cfg.delta) for B in F_S.materialized().blocks)
        pairs = zip(gen_C, gen_S)
        merge_one = lambda c, s: merge_blocks_fast(c, s, cfg)
    else:
        pairs = zip(F_C.materialized().blocks, F_S.materialized().blocks)
        merge_one = lambda c, s: merge_blocks_full(c, s, cfg)
    for i, (c, s) in enumerate(pairs):
        try:
            blocks.append(merge_one(c, s))
        except (linalg.EigenvalueNearMinusOne, linalg.PhaseOverflow) as exc:
            raise type(exc)(f"{name} block {i}: {exc}") from exc
    return BlockDiagonalFactor(blocks=tuple(blocks), storage=ORTHOGONAL)


def merge_adapters(A_C: GSAdapter, A_S: GSAdapter,
                   cfg: MergeConfig = MergeConfig()) -> GSAdapter | np.ndarray:
    """Merge two adapters pairwise over their left and right blocks.

    Any per-block guard failure aborts the whole merge (a partially
    merged adapter would mean nothing) with the factor and block index
    in the message. The multiply method is the naive baseline: it
    returns the dense product of the two assembled adapters, which is
    not a GS adapter at all.
    """
    _check_compatible(A_C, A_S)
    if cfg.method is MergeMethod.MULTIPLY:
        return assemble_dense(A_C) @ assemble_dense(A_S)
    left = _merge_factor("left", A_C.left, A_S.left, cfg)
    right = _merge_factor("right", A_C.right, A_S.right, cfg)
    return make_adapter(left, right, metadata=_merged_metadata(A_C, A_S))
