"""Verification batteries, diagnostic tables, and timing comparisons.

Everything here measures the production code from the outside: slope fits
confirming the third-order error claims, eigenphase tables for spectrum
scatter plots, per-step chord lengths along merge trajectories, relative
error against the dense ambient geodesic, and wall-clock benchmarks of
the fast versus the full merge. Tables are plain lists of tuples, and the
CSV writers are deterministic byte-for-byte for identical inputs.
"""

from __future__ import annotations

import dataclasses
import statistics
import time
from dataclasses import dataclass

import numpy as np

from . import fuse, linalg, oracles
from .fuse import DEFAULT_ETA0, EtaSchedule, MergeConfig, MergeMethod
from .geodesic import geodesic_path, velocity_profile
from .oracles import DEFAULT_BUDGET, OracleBudget
from .structure import GSAdapter, assemble_dense, perfect_shuffle
from .synth import SynthSpec, epsilon_of, random_adapter

# sweet spot for double precision: below 0.02 rounding noise contaminates
# the fit, above 0.16 higher-order terms bend it
EPS_SWEEP = (0.02, 0.04, 0.08, 0.16)
SLOPE_WINDOW = (2.7, 3.3)
R2_MIN = 0.98

SPECTRUM_HEADER = ("factor", "block", "phase_index", "phase",
                   "real_part", "imag_part")
TRAJECTORY_HEADER = ("segment", "t_start", "t_end", "chord")
COMPARE_HEADER = ("t", "method", "relative_error", "seconds")
BENCH_HEADER = ("method", "n", "b", "repeat", "seconds")


# --- slope fitting ---------------------------------------------------------

@dataclass(frozen=True)
class OrderFit:
    """Least-squares line through (log scale, log error) points."""

    points: tuple[tuple[float, float], ...]
    slope: float
    intercept: float
    r_squared: float

    def __post_init__(self):
        if len(self.points) < 3:
            raise ValueError(f"need at least 3 points, got {len(self.points)}")
        if not np.isfinite(self.slope):
            raise ValueError(f"slope must be finite, got {self.slope}")


def order_fit(scales, errors) -> OrderFit:
    """Fit log(error) against log(scale) by ordinary least squares."""
    scales = [float(s) for s in scales]
    errors = [float(e) for e in errors]
    if len(scales) != len(errors) or len(scales) < 3:
        raise ValueError(
            f"need matched lists of at least 3 values, got {len(scales)} "
            f"scales and {len(errors)} errors"
        )
    for value in scales + errors:
        if not (value > 0.0):
            raise ValueError(f"scales and errors must be positive, got {value}")
    xs = np.log(scales)
    ys = np.log(errors)
    slope, intercept = np.polyfit(xs, ys, 1)
    residual = ys - (slope * xs + intercept)
    total = ys - ys.mean()
    ss_tot = float(total @ total)
    ss_res = float(residual @ residual)
    r_squared = 1.0 if ss_tot <= 1e-30 else 1.0 - ss_res / ss_tot
    points = tuple(zip((float(x) for x in xs), (float(y) for y in ys)))
    return OrderFit(points=points, slope=float(slope),
                    intercept=float(intercept), r_squared=float(r_squared))


# --- cubic-order battery ---------------------------------------------------

def _unit_skew(rng: np.random.Generator, dim: int) -> np.ndarray:
    K = np.triu(rng.normal(size=(dim, dim)), 1)
    K = K - K.T
    return K / np.linalg.norm(K, 2)


def _battery_instances(seeds: int, dims) -> list[dict]:
    instances = []
    for seed in range(seeds):
        for dim in dims:
            rng = np.random.Generator(np.random.PCG64(
                np.random.SeedSequence(entropy=(8811, seed, dim))))
            instances.append({
                "dim": dim,
                "single": _unit_skew(rng, dim),
                # distinct spectral magnitudes keep the fast-vs-full cubic
                # coefficient away from zero in the abelian dim-2 case
                "pair_c": rng.uniform(0.4, 0.7) * _unit_skew(rng, dim),
                "pair_s": rng.uniform(0.8, 1.0) * _unit_skew(rng, dim),
            })
    return instances


def cubic_battery(seeds: int = 5, dims=(2, 8), t: float = 0.5,
                  eta0: float = DEFAULT_ETA0, sweep=EPS_SWEEP,
                  inject_bug: bool = False) -> dict[str, OrderFit]:
    """Third-order convergence fits for the core approximation steps.

    Returns one fit per named comparison; each pools `seeds` random
    instances per block size over the epsilon sweep. `inject_bug` flips
    the sign of the restoration coefficient in the restore-vs-exact
    comparison only, a deliberate defect that must drag that slope down
    to about 1 so the harness can prove it would catch a real regression.
    """
    schedule = EtaSchedule(eta0=eta0)
    cfg = MergeConfig(t=t, eta=schedule)
    endpoint_cfg = MergeConfig(t=0.0, eta=schedule, method=MergeMethod.FULL)
    sign = -1.0 if inject_bug else 1.0
    instances = _battery_instances(seeds, dims)
    errors: dict[str, list[float]] = {
        "log_vs_skew": [], "exp_vs_cayley": [], "restore_vs_exact": [],
        "fast_vs_full": [], "endpoint_recovery": [],
    }
    for eps in sweep:
        cells: dict[str, list[float]] = {name: [] for name in errors}
        for inst in instances:
            K = eps * inst["single"]
            B = linalg.so_exp(K)
            cells["log_vs_skew"].append(
                linalg.frobenius(linalg.so_log(B) - linalg.skew_part(B)))
            cells["exp_vs_cayley"].append(
                linalg.frobenius(linalg.so_exp(K) - linalg.cayley(0.5 * K)))
            restored = fuse._restore_with_coefficient(
                B, sign * fuse.eta_at(schedule, t) / 4.0)
            cells["restore_vs_exact"].append(
                linalg.frobenius(restored - fuse.rotate_exact(B, t, schedule)))
            D_C, D_S = eps * inst["pair_c"], eps * inst["pair_s"]
            fast = fuse.merge_blocks_fast(D_C, D_S, cfg)
            full = fuse.merge_blocks_full(
                linalg.cayley(D_C), linalg.cayley(D_S), cfg)
            cells["fast_vs_full"].append(linalg.frobenius(fast - full))
            B_C = linalg.cayley(D_C)
            recovered = fuse.merge_blocks_full(
                B_C, np.eye(inst["dim"]), endpoint_cfg)
            cells["endpoint_recovery"].append(linalg.frobenius(recovered - B_C))
        for name, values in cells.items():
            errors[name].append(float(np.mean(values)))
    return {name: order_fit(sweep, errs) for name, errs in errors.items()}


# --- spectrum and trajectory tables ----------------------------------------

def spectrum_table(adapter: GSAdapter) -> list[tuple]:
    """Eigenphase rows for every block of both factors.

    Each row is (factor, block, phase_index, phase, real_part, imag_part);
    the last two put the eigenvalue on the unit circle for scatter plots.
    """
    rows = []
    for factor_name, factor in (("left", adapter.left), ("right", adapter.right)):
        for i, block in enumerate(factor.materialized().blocks):
            for j, phase in enumerate(linalg.phase_spectrum(block)):
                rows.append((factor_name, i, j, float(phase),
                             float(np.cos(phase)), float(np.sin(phase))))
    return rows


def _all_blocks(adapter: GSAdapter) -> list[np.ndarray]:
    return (list(adapter.left.materialized().blocks)
            + list(adapter.right.materialized().blocks))


def trajectory_table(A_C: GSAdapter, A_S: GSAdapter, steps: int,
                     method: MergeMethod = MergeMethod.GEODESIC,
                     cfg: MergeConfig = MergeConfig()) -> list[tuple]:
    """Chord length between consecutive merge outputs on a uniform t grid.

    The chord combines every block of both factors in quadrature, so for
    the plain geodesic the column is constant. Rows are
    (segment, t_start, t_end, chord).
    """
    if steps < 2:
        raise ValueError(f"need at least 2 steps, got {steps}")
    grid = np.linspace(0.0, 1.0, steps)
    if method is MergeMethod.GEODESIC:
        paths = [geodesic_path(B_C, B_S, steps, delta=cfg.delta)
                 for B_C, B_S in zip(_all_blocks(A_C), _all_blocks(A_S))]
        chords = velocity_profile(paths)
    else:
        snapshots = []
        for t in grid:
            merged = fuse.merge_adapters(
                A_C, A_S, dataclasses.replace(cfg, t=float(t), method=method))
            if isinstance(merged, GSAdapter):
                snapshots.append(_all_blocks(merged))
            else:
                snapshots.append([merged])
        chords = []
        for a, b in zip(snapshots, snapshots[1:]):
            sq = sum(linalg.frobenius(y - x) ** 2 for x, y in zip(a, b))
            chords.append(float(np.sqrt(sq)))
    return [(i, float(grid[i]), float(grid[i + 1]), chord)
            for i, chord in enumerate(chords)]


# --- comparison against the dense ambient geodesic -------------------------

def compare_merges(A_C: GSAdapter, A_S: GSAdapter, ts,
                   methods=(MergeMethod.GEODESIC, MergeMethod.FULL,
                            MergeMethod.FAST),
                   eta0: float = DEFAULT_ETA0,
                   budget: OracleBudget = DEFAULT_BUDGET) -> list[tuple]:
    """Relative Frobenius error of each method against the dense geodesic.

    The reference curve lives on the assembled n x n matrices, so the
    oracle budget caps n. Rows are (t, method, relative_error, seconds);
    the timer covers only the merge under test, not the reference.
    """
    rows = []
    for t in ts:
        t = float(t)
        reference = oracles.ambient_geodesic(A_C, A_S, t, budget=budget)
        scale = linalg.frobenius(reference)
        for method in methods:
            cfg = MergeConfig(t=t, eta=EtaSchedule(eta0=eta0), method=method)
            start = time.perf_counter()
            merged = fuse.merge_adapters(A_C, A_S, cfg)
            seconds = time.perf_counter() - start
            dense = merged if isinstance(merged, np.ndarray) \
                else assemble_dense(merged)
            rel = linalg.frobenius(dense - reference) / scale
            rows.append((t, method.value, float(rel), float(seconds)))
    return rows


# --- timing ----------------------------------------------------------------

@dataclass(frozen=True)
class TimingReport:
    """Wall-clock samples for one merge method at one problem size."""

    method: str
    n: int
    b: int
    samples: tuple[float, ...]
    median: float
    minimum: float

    @property
    def repeats(self) -> int:
        return len(self.samples)

    def __post_init__(self):
        if len(self.samples) < 3:
            raise ValueError(f"need at least 3 samples, got {len(self.samples)}")


def _block_pairs(A_C: GSAdapter, A_S: GSAdapter) -> list:
    left = zip(A_C.left.materialized().blocks, A_S.left.materialized().blocks)
    right = zip(A_C.right.materialized().blocks, A_S.right.materialized().blocks)
    return list(left) + list(right)


def bench_merge(spec: SynthSpec,
                methods=(MergeMethod.FAST, MergeMethod.FULL),
                repeats: int = 5, t: float = fuse.DEFAULT_T,
                profile: bool = False) -> list[TimingReport]:
    """Time repeated merges of a seeded random pair, one report per method.

    Includes one untimed warmup call per method. When both the fast and
    the full method are measured at n >= 1024 with 64-wide blocks, the
    fast median must come out strictly smaller; anything else means the
    shortcut has stopped being one and is reported as an error.

    With `profile` a "decompose" report is appended that times only the
    per-block spectral factorization of the relative rotations, the step
    that dominates the full merge; its share of the full median is the
    interesting number.
    """
    if repeats < 3:
        raise ValueError(f"need at least 3 repeats, got {repeats}")
    A_C = random_adapter(spec)
    A_S = random_adapter(dataclasses.replace(spec, seed=spec.seed + 1))
    reports = []
    for method in methods:
        cfg = MergeConfig(t=t, method=method)
        fuse.merge_adapters(A_C, A_S, cfg)
        samples = []
        for _ in range(repeats):
            start = time.perf_counter()
            fuse.merge_adapters(A_C, A_S, cfg)
            samples.append(time.perf_counter() - start)
        reports.append(TimingReport(
            method=method.value, n=spec.n, b=spec.b, samples=tuple(samples),
            median=float(statistics.median(samples)),
            minimum=float(min(samples))))
    if profile:
        pairs = _block_pairs(A_C, A_S)
        for B_C, B_S in pairs:
            linalg.so_log(B_S.T @ B_C)
        samples = []
        for _ in range(repeats):
            start = time.perf_counter()
            for B_C, B_S in pairs:
                linalg.so_log(B_S.T @ B_C)
            samples.append(time.perf_counter() - start)
        reports.append(TimingReport(
            method="decompose", n=spec.n, b=spec.b, samples=tuple(samples),
            median=float(statistics.median(samples)),
            minimum=float(min(samples))))
    by_method = {r.method: r for r in reports}
    if (spec.n >= 1024 and spec.b == 64
            and MergeMethod.FAST.value in by_method
            and MergeMethod.FULL.value in by_method):
        fast, full = by_method["fast"], by_method["full"]
        if not fast.median < full.median:
            raise ArithmeticError(
                f"fast merge median {fast.median:.4f}s not below full "
                f"merge median {full.median:.4f}s at n={spec.n}, b={spec.b}"
            )
    return reports


def bench_table(reports: list[TimingReport]) -> list[tuple]:
    """One (method, n, b, repeat, seconds) row per timing sample."""
    return [(r.method, r.n, r.b, i, s)
            for r in reports for i, s in enumerate(r.samples)]


# --- verification suites ---------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    measured: float
    bound: str
    passed: bool


def _pair(n: int, b: int, sigma: float, seed: int) -> tuple[GSAdapter, GSAdapter]:
    return (random_adapter(SynthSpec(n=n, b=b, sigma=sigma, seed=seed)),
            random_adapter(SynthSpec(n=n, b=b, sigma=sigma, seed=seed + 1)))


def _valid_widths(n: int) -> list[int]:
    return [b for b in (2, 8) if b <= n and n % b == 0]


def verify_props(sizes=(8,), seeds=(1, 2, 3), sigma: float = 0.1,
                 eta0: float = DEFAULT_ETA0) -> list[CheckResult]:
    """Exact-identity and closed-form checks on seeded random adapters."""
    cells = [(n, b, seed) for n in sizes for b in _valid_widths(n)
             for seed in seeds]
    if not cells:
        raise ValueError(f"no valid (n, b) cells in sizes {tuple(sizes)}")
    schedule = EtaSchedule(eta0=eta0)
    results = []

    # entry-exact commutation of the shuffle with Kronecker products
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(8812)))
    worst_kron = 0.0
    for n in range(2, 25):
        for b in (d for d in range(1, n + 1) if n % d == 0):
            shuffle = perfect_shuffle(b, n)
            for _ in range(3):
                D = np.diag(rng.normal(size=b))
                M = rng.normal(size=(n // b, n // b))
                lhs = shuffle.conjugate(np.kron(D, M))
                worst_kron = max(worst_kron,
                                 float(np.abs(lhs - np.kron(M, D)).max()))
    results.append(CheckResult("props", "shuffle_kron_commutation",
                               worst_kron, "== 0", worst_kron == 0.0))

    ts = np.linspace(0.0, 1.0, 11)
    worst_transpose = 0.0
    worst_speed = 0.0
    worst_endpoint = 0.0
    worst_ortho = 0.0
    for n, b, seed in cells:
        A_C, A_S = _pair(n, b, sigma, seed)
        blocks_c, blocks_s = _all_blocks(A_C), _all_blocks(A_S)
        for B_C, B_S in zip(blocks_c, blocks_s):
            for t in ts:
                fwd = fuse.merge_blocks_full(B_C, B_S, MergeConfig(
                    t=float(t), method=MergeMethod.GEODESIC))
                swapped = fuse.merge_blocks_full(B_C.T, B_S.T, MergeConfig(
                    t=float(t), method=MergeMethod.GEODESIC))
                worst_transpose = max(worst_transpose,
                                      linalg.frobenius(swapped - fwd.T))
        paths = [geodesic_path(x, y, 11) for x, y in zip(blocks_c, blocks_s)]
        chords = velocity_profile(paths)
        worst_speed = max(worst_speed,
                          float(np.std(chords) / np.mean(chords)))
        for t, target in ((0.0, A_C), (1.0, A_S)):
            merged = fuse.merge_adapters(A_C, A_S, MergeConfig(
                t=t, method=MergeMethod.GEODESIC))
            worst_endpoint = max(worst_endpoint, max(
                linalg.frobenius(x - y) for x, y in
                zip(_all_blocks(merged), _all_blocks(target))))
        for method in (MergeMethod.GEODESIC, MergeMethod.FULL, MergeMethod.FAST):
            merged = fuse.merge_adapters(A_C, A_S, MergeConfig(
                eta=schedule, method=method))
            worst_ortho = max(worst_ortho, max(
                linalg.orthogonality_residual(blk)
                for blk in _all_blocks(merged)))
    results.append(CheckResult("props", "geodesic_transpose_identity",
                               worst_transpose, "<= 1e-11",
                               worst_transpose <= 1e-11))
    results.append(CheckResult("props", "geodesic_constant_speed",
                               worst_speed, "<= 1e-8 rel", worst_speed <= 1e-8))
    results.append(CheckResult("props", "geodesic_endpoint_recovery",
                               worst_endpoint, "<= 1e-11",
                               worst_endpoint <= 1e-11))
    results.append(CheckResult("props", "merged_blocks_orthogonal",
                               worst_ortho, "<= 1e-10", worst_ortho <= 1e-10))

    if any(b == 2 for _, b, _ in cells):
        worst_scalar = 0.0
        for n, b, seed in cells:
            if b != 2:
                continue
            A_C, A_S = _pair(n, b, sigma, seed)
            for t in (0.25, 0.5, 0.6, 0.75):
                merged = fuse.merge_adapters(A_C, A_S, MergeConfig(
                    t=t, eta=schedule))
                for out, B_C, B_S in zip(_all_blocks(merged),
                                         _all_blocks(A_C), _all_blocks(A_S)):
                    want = oracles.rotation(oracles.merged_angle(
                        float(np.arctan2(B_C[1, 0], B_C[0, 0])),
                        float(np.arctan2(B_S[1, 0], B_S[0, 0])), t, eta0))
                    worst_scalar = max(worst_scalar,
                                       float(np.abs(out - want).max()))
        results.append(CheckResult("props", "planar_closed_form_angle",
                                   worst_scalar, "<= 1e-12",
                                   worst_scalar <= 1e-12))

    worst_doubling = 0.0
    for n, b, seed in cells:
        A_C, A_S = _pair(n, b, 0.05, seed)
        eps = max(epsilon_of(A_C), epsilon_of(A_S))
        geo = fuse.merge_adapters(A_C, A_S, MergeConfig(
            t=0.5, method=MergeMethod.GEODESIC))
        full = fuse.merge_adapters(A_C, A_S, MergeConfig(t=0.5))
        mean_geo = float(np.mean([np.abs(linalg.phase_spectrum(blk)).mean()
                                  for blk in _all_blocks(geo)]))
        mean_full = float(np.mean([np.abs(linalg.phase_spectrum(blk)).mean()
                                   for blk in _all_blocks(full)]))
        worst_doubling = max(worst_doubling,
                             abs(mean_full - 2.0 * mean_geo) / (5.0 * eps ** 3))
    results.append(CheckResult("props", "midpoint_phase_doubling",
                               worst_doubling, "<= 1 of 5*eps^3",
                               worst_doubling <= 1.0))
    return results


def verify_orders(seeds: int = 5, dims=(2, 8), t: float = 0.5,
                  eta0: float = DEFAULT_ETA0,
                  inject_bug: bool = False
                  ) -> tuple[dict[str, OrderFit], list[CheckResult]]:
    """Slope-window checks over the cubic battery fits."""
    fits = cubic_battery(seeds=seeds, dims=dims, t=t, eta0=eta0,
                         inject_bug=inject_bug)
    lo, hi = SLOPE_WINDOW
    results = []
    for name, fit in fits.items():
        ok = lo <= fit.slope <= hi and fit.r_squared >= R2_MIN
        results.append(CheckResult(
            "orders", name, fit.slope,
            f"slope in [{lo}, {hi}], r2 >= {R2_MIN}", ok))
    return fits, results


def run_verify(suite: str = "all", sizes=(8,), seeds=(1, 2, 3),
               inject_bug: bool = False
               ) -> tuple[list[CheckResult], dict[str, OrderFit]]:
    """Run the named suite(s); returns all check rows plus any order fits."""
    if suite not in ("props", "orders", "all"):
        raise ValueError(f"unknown suite {suite!r}")
    results: list[CheckResult] = []
    fits: dict[str, OrderFit] = {}
    if suite in ("props", "all"):
        results.extend(verify_props(sizes=sizes, seeds=seeds))
    if suite in ("orders", "all"):
        fits, order_results = verify_orders(seeds=len(seeds),
                                            inject_bug=inject_bug)
        results.extend(order_results)
    return results, fits


# --- CSV output ------------------------------------------------------------

def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(path, header, rows) -> None:
    """Comma-separated, LF endings, floats at 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(cell) for cell in row) + "\n")
