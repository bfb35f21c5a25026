"""Merging of group-and-shuffle orthogonal adapters.

The package builds block-diagonal orthogonal adapters conjugated by a
perfect shuffle, interpolates them along blockwise geodesics, restores
the eigenphase spread the interpolation compresses, and ships the
verification machinery proving the third-order error behavior of every
approximation involved.

Submodules load on first attribute access so the command-line driver can
cap the numeric libraries' thread pools before anything imports them.
"""

import importlib

__version__ = "0.1.0"

_EXPORTS = {
    # structure
    "GSAdapter": "structure",
    "BlockDiagonalFactor": "structure",
    "PerfectShuffle": "structure",
    "perfect_shuffle": "structure",
    "make_adapter": "structure",
    "identity_adapter": "structure",
    "identity_factor": "structure",
    "assemble_dense": "structure",
    "apply_to_weights": "structure",
    "validate": "structure",
    "ValidationReport": "structure",
    "CONVENTION": "structure",
    "ORTHOGONAL": "structure",
    "CAYLEY": "structure",
    # linalg
    "cayley": "linalg",
    "inverse_cayley": "linalg",
    "skew_part": "linalg",
    "so_log": "linalg",
    "so_exp": "linalg",
    "so_power": "linalg",
    "phase_spectrum": "linalg",
    "reorthogonalize": "linalg",
    "orthogonality_residual": "linalg",
    "OrthogonalityError": "linalg",
    "EigenvalueNearMinusOne": "linalg",
    "PhaseOverflow": "linalg",
    # geodesic
    "block_geodesic": "geodesic",
    "geodesic_path": "geodesic",
    "velocity_profile": "geodesic",
    "GeodesicPath": "geodesic",
    "ExtrapolationWarning": "geodesic",
    # fuse
    "merge_adapters": "fuse",
    "merge_blocks_full": "fuse",
    "merge_blocks_fast": "fuse",
    "spectra_restore": "fuse",
    "rotate_exact": "fuse",
    "eta_at": "fuse",
    "EtaSchedule": "fuse",
    "MergeConfig": "fuse",
    "MergeMethod": "fuse",
    "IncompatibleAdapters": "fuse",
    "DEFAULT_T": "fuse",
    "DEFAULT_ETA0": "fuse",
    # synth
    "SynthSpec": "synth",
    "random_adapter": "synth",
    "epsilon_of": "synth",
    # lowrank
    "LowRankFactors": "lowrank",
    "AlsTrace": "lowrank",
    "als_merge": "lowrank",
    "multi_als_merge": "lowrank",
    "als_objective": "lowrank",
    # adapter_io
    "read_adapter": "adapter_io",
    "write_adapter": "adapter_io",
    "read_lowrank": "adapter_io",
    "write_lowrank": "adapter_io",
    "read_dense": "adapter_io",
    "write_dense": "adapter_io",
    "UnknownFormatTag": "adapter_io",
    "StructuralMismatch": "adapter_io",
    "NonFiniteValue": "adapter_io",
    # analysis
    "OrderFit": "analysis",
    "order_fit": "analysis",
    "cubic_battery": "analysis",
    "spectrum_table": "analysis",
    "trajectory_table": "analysis",
    "compare_merges": "analysis",
    "bench_merge": "analysis",
    "run_verify": "analysis",
}

__all__ = ["__version__", *sorted(_EXPORTS)]


def __getattr__(name):
    try:
        module_name = _EXPORTS[name]
    except KeyError:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    value = getattr(importlib.import_module(f".{module_name}", __name__), name)
    globals()[name] = value
    return value


def __dir__():
    return sorted(set(globals()) | set(_EXPORTS))
