"""Geodesics between orthogonal blocks under the bi-invariant metric.

The curve from B_C to B_S is B(t) = B_C exp(-t log(B_S^T B_C)): a
left-translated one-parameter subgroup, so it has exactly constant speed
and stays orthogonal at every t. Everything reduces to the matrix
functions in linalg acting on the relative rotation B_S^T B_C, which
must keep its eigenphases away from pi (the cut locus).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import linalg


class ExtrapolationWarning(UserWarning):
    """The interpolation coordinate left [0, 1] (allowed for sweeps)."""


def _relative_log(B_C: np.ndarray, B_S: np.ndarray, delta: float) -> np.ndarray:
    return linalg.so_log(B_S.T @ B_C, delta=delta)


def _warn_if_extrapolating(t: float) -> None:
    if t < 0.0 or t > 1.0:
        warnings.warn(f"t = {t} lies outside [0, 1]; extrapolating the geodesic",
                      ExtrapolationWarning, stacklevel=3)


def block_geodesic(B_C: np.ndarray, B_S: np.ndarray, t: float,
                   delta: float = linalg.GUARD_DELTA) -> np.ndarray:
    """Point B_C exp(-t log(B_S^T B_C)) on the connecting geodesic.

    Endpoints are returned as exact copies so that t = 0 / t = 1 (and a
    merge of an adapter with itself) reproduce the inputs bit for bit.
    """
    _warn_if_extrapolating(t)
    if np.array_equal(B_C, B_S) or t == 0.0:
        return B_C.copy()
    if t == 1.0:
        return B_S.copy()
    return B_C @ linalg.so_exp(-t * _relative_log(B_C, B_S, delta))


@dataclass(frozen=True, eq=False)
class GeodesicPath:
    """Uniformly sampled geodesic: (t_i, B(t_i)) pairs plus the endpoints."""

    steps: tuple[tuple[float, np.ndarray], ...]
    source: np.ndarray
    target: np.ndarray


def geodesic_path(B_C: np.ndarray, B_S: np.ndarray, steps: int,
                  delta: float = linalg.GUARD_DELTA) -> GeodesicPath:
    """Sample the geodesic at t_i = i/(steps-1), computing the log once."""
    if steps < 2:
        raise ValueError(f"a path needs at least 2 steps, got {steps}")
    grid = np.linspace(0.0, 1.0, steps)
    if np.array_equal(B_C, B_S):
        pairs = tuple((float(t), B_C.copy()) for t in grid)
        return GeodesicPath(steps=pairs, source=B_C, target=B_S)
    omega = _relative_log(B_C, B_S, delta)
    pairs = []
    for t in grid:
        if t == 0.0:
            blk = B_C.copy()
        elif t == 1.0:
            blk = B_S.copy()
        else:
            blk = B_C @ linalg.so_exp(-float(t) * omega)
        pairs.append((float(t), blk))
    return GeodesicPath(steps=tuple(pairs), source=B_C, target=B_S)


def velocity_profile(path: GeodesicPath | list[GeodesicPath]) -> list[float]:
    """Chord lengths between consecutive samples, in Frobenius norm.

    A list of paths (one per block of an adapter, sharing the t grid) is
    combined as the root of the summed squared block chords, which equals
    the chord of the full block-diagonal factor.
    """
    paths = [path] if isinstance(path, GeodesicPath) else list(path)
    if not paths or len(paths[0].steps) < 2:
        raise ValueError("need at least one path with at least 2 steps")
    count = len(paths[0].steps)
    if any(len(p.steps) != count for p in paths):
        raise ValueError("all block paths must share the same t grid")
    chords = []
    for i in range(count - 1):
        sq = 0.0
        for p in paths:
            diff = p.steps[i + 1][1] - p.steps[i][1]
            sq += float(np.sum(diff * diff))
        chords.append(float(np.sqrt(sq)))
    return chords
