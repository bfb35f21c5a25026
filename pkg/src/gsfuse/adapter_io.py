"""Bit-exact, diffable file formats.

Three JSON-shaped schemas, each carrying a version tag: "gs-adapter/v1"
for block-diagonal adapters (either storage mode), "lr-adapter/v1" for
low-rank factor pairs, and "dense-matrix/v1" for dense matrices such as
the multiplication baseline's output. Writes are canonical: fixed key
order, two-space indent, LF endings, floats in shortest round-trip
decimal form. Identical values always produce identical bytes, and any
malformed field is a named error rather than a silent coercion.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .lowrank import LowRankFactors
from .structure import (
    CAYLEY,
    CONVENTION,
    ORTHOGONAL,
    BlockDiagonalFactor,
    GSAdapter,
    make_adapter,
)

ADAPTER_TAG = "gs-adapter/v1"
LOWRANK_TAG = "lr-adapter/v1"
DENSE_TAG = "dense-matrix/v1"


class UnknownFormatTag(ValueError):
    """The file's format tag is missing or not one this package writes."""


class StructuralMismatch(ValueError):
    """A field has the wrong type, length, or an inconsistent value."""


class NonFiniteValue(ValueError):
    """A matrix entry is NaN or infinite."""


def _dump(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(doc, indent=2, allow_nan=False))
        fh.write("\n")


def _load(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise StructuralMismatch(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise StructuralMismatch("top level must be an object")
    return doc


def _expect_tag(doc: dict, tag: str) -> None:
    found = doc.get("format")
    if found != tag:
        raise UnknownFormatTag(f"expected format tag {tag!r}, found {found!r}")


def _int_field(doc: dict, name: str) -> int:
    value = doc.get(name)
    if isinstance(value, bool) or not isinstance(value, int):
        raise StructuralMismatch(f"{name} must be an integer, got {value!r}")
    return value


def _number_list(raw, what: str, length: int) -> list[float]:
    if not isinstance(raw, list) or len(raw) != length:
        have = len(raw) if isinstance(raw, list) else type(raw).__name__
        raise StructuralMismatch(f"{what} must hold {length} numbers, has {have}")
    out = []
    for j, x in enumerate(raw):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise StructuralMismatch(f"{what} entry {j} is not a number: {x!r}")
        if not math.isfinite(x):
            raise NonFiniteValue(f"{what} entry {j} is not finite")
        out.append(float(x))
    return out


def _block_floats(block: np.ndarray, what: str) -> list[float]:
    flat = [float(x) for x in np.asarray(block, dtype=float).ravel()]
    for j, x in enumerate(flat):
        if not math.isfinite(x):
            raise NonFiniteValue(f"{what} entry {j} is not finite")
    return flat


# --- gs adapters -----------------------------------------------------------

def write_adapter(adapter: GSAdapter, path) -> None:
    """Canonical serialization; equal adapters give byte-equal files."""
    if adapter.left.storage != adapter.right.storage:
        raise StructuralMismatch(
            f"factors disagree on storage: {adapter.left.storage!r} "
            f"vs {adapter.right.storage!r}"
        )
    doc = {
        "format": ADAPTER_TAG,
        "n": int(adapter.n),
        "b": int(adapter.b),
        "k": int(adapter.k),
        "storage": adapter.left.storage,
        "permutation": {
            "kind": "perfect_shuffle",
            "b": int(adapter.b),
            "n": int(adapter.n),
            "convention": adapter.convention,
        },
        "left_blocks": [_block_floats(blk, f"left_blocks[{i}]")
                        for i, blk in enumerate(adapter.left.blocks)],
        "right_blocks": [_block_floats(blk, f"right_blocks[{i}]")
                         for i, blk in enumerate(adapter.right.blocks)],
    }
    if adapter.metadata:
        doc["metadata"] = {key: adapter.metadata[key]
                           for key in sorted(adapter.metadata)}
    _dump(doc, path)


def _parse_blocks(doc: dict, name: str, k: int, b: int) -> tuple[np.ndarray, ...]:
    raw = doc.get(name)
    if not isinstance(raw, list) or len(raw) != k:
        have = len(raw) if isinstance(raw, list) else type(raw).__name__
        raise StructuralMismatch(f"{name} must hold {k} blocks, has {have}")
    blocks = []
    for i, entry in enumerate(raw):
        flat = _number_list(entry, f"{name}[{i}]", b * b)
        blocks.append(np.array(flat).reshape(b, b))
    return tuple(blocks)


def read_adapter(path) -> GSAdapter:
    """Parse and structurally check a gs-adapter file.

    Numeric orthogonality is deliberately not checked here; that is the
    job of the validation command.
    """
    doc = _load(path)
    _expect_tag(doc, ADAPTER_TAG)
    n = _int_field(doc, "n")
    b = _int_field(doc, "b")
    k = _int_field(doc, "k")
    if b < 1 or n < 1 or n % b != 0 or k != n // b:
        raise StructuralMismatch(f"inconsistent shape: n={n}, b={b}, k={k}")
    storage = doc.get("storage")
    if storage not in (ORTHOGONAL, CAYLEY):
        raise StructuralMismatch(f"unknown storage {storage!r}")
    perm = doc.get("permutation")
    want_perm = {"kind": "perfect_shuffle", "b": b, "n": n, "convention": CONVENTION}
    if perm != want_perm:
        raise StructuralMismatch(f"permutation descriptor must be {want_perm}, got {perm!r}")
    left = _parse_blocks(doc, "left_blocks", k, b)
    right = _parse_blocks(doc, "right_blocks", k, b)
    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict):
        raise StructuralMismatch(f"metadata must be an object, got {metadata!r}")
    return make_adapter(
        BlockDiagonalFactor(blocks=left, storage=storage),
        BlockDiagonalFactor(blocks=right, storage=storage),
        metadata=metadata,
    )


# --- low-rank factors ------------------------------------------------------

def write_lowrank(factors: LowRankFactors, path) -> None:
    doc = {
        "format": LOWRANK_TAG,
        "n": int(factors.n),
        "m": int(factors.m),
        "r": int(factors.r),
        "U": _block_floats(factors.U, "U"),
        "V": _block_floats(factors.V, "V"),
    }
    _dump(doc, path)


def read_lowrank(path) -> LowRankFactors:
    doc = _load(path)
    _expect_tag(doc, LOWRANK_TAG)
    n = _int_field(doc, "n")
    m = _int_field(doc, "m")
    r = _int_field(doc, "r")
    if n < 1 or m < 1:
        raise StructuralMismatch(f"inconsistent shape: n={n}, m={m}")
    if not 1 <= r <= min(n, m):
        raise StructuralMismatch(f"rank {r} out of range for (n={n}, m={m})")
    U = np.array(_number_list(doc.get("U"), "U", n * r)).reshape(n, r)
    V = np.array(_number_list(doc.get("V"), "V", m * r)).reshape(m, r)
    return LowRankFactors(n=n, m=m, r=r, U=U, V=V)


# --- dense matrices --------------------------------------------------------

def write_dense(M: np.ndarray, path) -> None:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise StructuralMismatch(f"dense payload must be 2-D, got shape {M.shape}")
    doc = {
        "format": DENSE_TAG,
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "entries": _block_floats(M, "entries"),
    }
    _dump(doc, path)


def read_dense(path) -> np.ndarray:
    doc = _load(path)
    _expect_tag(doc, DENSE_TAG)
    rows = _int_field(doc, "rows")
    cols = _int_field(doc, "cols")
    if rows < 1 or cols < 1:
        raise StructuralMismatch(f"inconsistent shape: rows={rows}, cols={cols}")
    flat = _number_list(doc.get("entries"), "entries", rows * cols)
    return np.array(flat).reshape(rows, cols)
