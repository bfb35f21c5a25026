"""Command-line interface.

Subcommands: gen, merge, spectrum, trajectory, verify, lowrank-merge,
bench. Report commands write a delimited table and, by default, render a
matching PNG figure next to it. Heavy imports happen after argument
parsing so the global --threads cap can take effect before the numeric
libraries configure their thread pools.

Exit codes are a stable contract: 0 success, 1 I/O failure, 2 usage
error, 3 numerical guard tripped, 4 structural problem with an input,
5 verification failure.
"""

from __future__ import annotations

import argparse
import os
import sys

EXIT_IO = 1
EXIT_USAGE = 2
EXIT_GUARD = 3
EXIT_STRUCTURE = 4
EXIT_VERIFY = 5


class UsageError(Exception):
    """Flag combination that argparse cannot catch on its own."""


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(",") if part)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsfuse",
        description="Merge block-diagonal orthogonal adapters.")
    parser.add_argument("--threads", type=_positive_int, default=None,
                        help="cap the numeric libraries' thread pools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a seeded random adapter")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--b", type=_positive_int, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--storage", choices=("orthogonal", "cayley"),
                   default="orthogonal")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("merge", help="merge two adapter files")
    p.add_argument("concept")
    p.add_argument("style")
    p.add_argument("--t", type=float, default=0.6)
    p.add_argument("--eta0", type=float, default=2.0)
    p.add_argument("--method", default="full",
                   choices=("geodesic", "full", "fast", "multiply", "exact"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("spectrum", help="eigenphase table of an adapter")
    p.add_argument("adapter")
    p.add_argument("--out", required=True, help="CSV path")
    _add_plot_flags(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("trajectory", help="per-step chords of a merge curve")
    p.add_argument("concept")
    p.add_argument("style")
    p.add_argument("--steps", type=_positive_int, default=11)
    p.add_argument("--method", default="geodesic",
                   choices=("geodesic", "full", "fast", "multiply", "exact"))
    p.add_argument("--eta0", type=float, default=2.0)
    p.add_argument("--out", required=True, help="CSV path")
    _add_plot_flags(p)
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("verify", help="run the property and order suites")
    p.add_argument("--suite", choices=("props", "orders", "all"), default="all")
    p.add_argument("--sizes", type=_int_list, default=(8,),
                   help="comma-separated dimensions")
    p.add_argument("--seeds", type=_int_list, default=(1, 2, 3),
                   help="comma-separated seeds")
    p.add_argument("--plot", default=None, help="render the results to a PNG")
    p.add_argument("--inject-bug", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lowrank-merge", help="ALS merge of low-rank factors")
    p.add_argument("concept")
    p.add_argument("style")
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--iters", type=_positive_int, default=200)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_lowrank_merge)

    p = sub.add_parser("bench", help="time merge methods on a seeded pair")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--b", type=_positive_int, required=True)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--storage", choices=("orthogonal", "cayley"),
                   default="cayley")
    p.add_argument("--methods", default="fast,full",
                   help="comma-separated merge methods")
    p.add_argument("--repeats", type=_positive_int, default=5)
    p.add_argument("--profile", action="store_true",
                   help="also time the per-block spectral factorization alone")
    p.add_argument("--out", default=None, help="also write the CSV here")
    p.set_defaults(func=cmd_bench)
    return parser


def _add_plot_flags(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group()
    group.add_argument("--plot", default=None,
                       help="figure path (default: CSV path with .png)")
    group.add_argument("--no-plot", action="store_true",
                       help="skip the figure")


def _figure_path(args) -> str | None:
    if args.no_plot:
        return None
    if args.plot is not None:
        return args.plot
    return os.path.splitext(args.out)[0] + ".png"


def _check_divides(b: int, n: int) -> None:
    if n % b != 0:
        raise UsageError(f"b must divide n (got n={n}, b={b})")


def _merge_config(t: float, eta0: float, method: str):
    from .fuse import EtaSchedule, MergeConfig, MergeMethod

    if eta0 < 0.0:
        raise UsageError(f"eta0 must be >= 0, got {eta0}")
    return MergeConfig(t=t, eta=EtaSchedule(eta0=eta0),
                       method=MergeMethod(method))


# --- command handlers ------------------------------------------------------

def cmd_gen(args) -> int:
    from .adapter_io import write_adapter
    from .synth import SynthSpec, epsilon_of, random_adapter

    _check_divides(args.b, args.n)
    if args.sigma < 0.0:
        raise UsageError(f"sigma must be >= 0, got {args.sigma}")
    adapter = random_adapter(SynthSpec(n=args.n, b=args.b, sigma=args.sigma,
                                       seed=args.seed, storage=args.storage))
    write_adapter(adapter, args.out)
    print(f"epsilon: {epsilon_of(adapter):.17g}")
    print(f"wrote {args.out}")
    return 0


def _guard_margin(A_C, A_S) -> float:
    """Smallest distance of any relative-rotation eigenphase to pi."""
    import numpy as np

    from . import linalg

    margin = float(np.pi)
    for factor in ("left", "right"):
        blocks_c = getattr(A_C, factor).materialized().blocks
        blocks_s = getattr(A_S, factor).materialized().blocks
        for B_C, B_S in zip(blocks_c, blocks_s):
            phases = linalg.phase_spectrum(B_S.T @ B_C)
            if phases.size:
                margin = min(margin, float(np.pi - np.abs(phases).max()))
    return margin


def cmd_merge(args) -> int:
    import numpy as np

    from . import linalg
    from .adapter_io import read_adapter, write_adapter, write_dense
    from .structure import GSAdapter
    from .fuse import merge_adapters

    cfg = _merge_config(args.t, args.eta0, args.method)
    A_C = read_adapter(args.concept)
    A_S = read_adapter(args.style)
    merged = merge_adapters(A_C, A_S, cfg)
    print(f"guard margin: {_guard_margin(A_C, A_S):.17g}")
    if isinstance(merged, GSAdapter):
        for name in ("left", "right"):
            worst = max(linalg.orthogonality_residual(blk) for blk
                        in getattr(merged, name).materialized().blocks)
            print(f"{name} max block residual: {worst:.17g}")
        write_adapter(merged, args.out)
    else:
        print(f"product residual: {linalg.orthogonality_residual(merged):.17g}")
        write_dense(merged, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_spectrum(args) -> int:
    from .adapter_io import read_adapter
    from .analysis import SPECTRUM_HEADER, spectrum_table, write_csv

    rows = spectrum_table(read_adapter(args.adapter))
    write_csv(args.out, SPECTRUM_HEADER, rows)
    print(f"wrote {args.out}")
    figure = _figure_path(args)
    if figure is not None:
        from .plots import plot_spectrum

        plot_spectrum(rows, figure)
        print(f"wrote {figure}")
    return 0


def cmd_trajectory(args) -> int:
    from .adapter_io import read_adapter
    from .analysis import TRAJECTORY_HEADER, trajectory_table, write_csv
    from .fuse import MergeMethod

    if args.steps < 2:
        raise UsageError(f"steps must be >= 2, got {args.steps}")
    cfg = _merge_config(0.0, args.eta0, args.method)
    rows = trajectory_table(read_adapter(args.concept),
                            read_adapter(args.style), args.steps,
                            method=MergeMethod(args.method), cfg=cfg)
    write_csv(args.out, TRAJECTORY_HEADER, rows)
    print(f"wrote {args.out}")
    figure = _figure_path(args)
    if figure is not None:
        from .plots import plot_trajectory

        plot_trajectory(rows, figure)
        print(f"wrote {figure}")
    return 0


def cmd_verify(args) -> int:
    from .analysis import run_verify

    results, fits = run_verify(args.suite, sizes=args.sizes, seeds=args.seeds,
                               inject_bug=args.inject_bug)
    for r in results:
        flag = "PASS" if r.passed else "FAIL"
        print(f"{r.suite:<7s} {r.name:<30s} {r.measured:>13.6e}  "
              f"{r.bound:<30s} {flag}")
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} checks passed")
    if args.plot is not None:
        from .plots import plot_verify

        plot_verify(results, fits, args.plot)
        print(f"wrote {args.plot}")
    return 0 if passed == len(results) else EXIT_VERIFY


def cmd_lowrank_merge(args) -> int:
    from .adapter_io import StructuralMismatch, read_lowrank, write_lowrank
    from .lowrank import als_merge

    if not 0.0 <= args.t <= 1.0:
        raise UsageError(f"t must lie in [0, 1], got {args.t}")
    X_C = read_lowrank(args.concept)
    X_S = read_lowrank(args.style)
    try:
        trace = als_merge(X_C, X_S, args.t, max_iters=args.iters, tol=args.tol)
    except ValueError as exc:
        raise StructuralMismatch(str(exc)) from exc
    write_lowrank(trace.factors, args.out)
    print(f"objective: {trace.iterations[-1]:.17g}")
    print(f"sweeps: {len(trace.iterations)}")
    print(f"converged: {'yes' if trace.converged else 'no'}")
    print(f"wrote {args.out}")
    return 0


def cmd_bench(args) -> int:
    from .analysis import BENCH_HEADER, bench_merge, bench_table, write_csv
    from .fuse import MergeMethod
    from .synth import SynthSpec

    _check_divides(args.b, args.n)
    try:
        methods = tuple(MergeMethod(name)
                        for name in args.methods.split(",") if name)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not methods:
        raise UsageError("no merge methods named")
    if args.repeats < 3:
        raise UsageError(f"repeats must be >= 3, got {args.repeats}")
    reports = bench_merge(SynthSpec(n=args.n, b=args.b, sigma=args.sigma,
                                    seed=args.seed, storage=args.storage),
                          methods=methods, repeats=args.repeats,
                          profile=args.profile)
    rows = bench_table(reports)
    print(",".join(BENCH_HEADER))
    for row in rows:
        print(",".join(str(c) if isinstance(c, (str, int)) else f"{c:.17g}"
                       for c in row))
    for report in reports:
        print(f"# {report.method}: median {report.median:.6g}s "
              f"min {report.minimum:.6g}s over {report.repeats} runs")
    by_method = {r.method: r for r in reports}
    if "decompose" in by_method and "full" in by_method:
        share = by_method["decompose"].median / by_method["full"].median
        print(f"# decompose share of full median: {100.0 * share:.1f}%")
    if args.out is not None:
        write_csv(args.out, BENCH_HEADER, rows)
        print(f"# wrote {args.out}")
    return 0


# --- driver ----------------------------------------------------------------

def _cap_threads(threads: int | None) -> None:
    if threads is None:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ[var] = str(threads)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    _cap_threads(args.threads)

    from .adapter_io import NonFiniteValue, StructuralMismatch, UnknownFormatTag
    from .fuse import IncompatibleAdapters
    from .linalg import EigenvalueNearMinusOne, OrthogonalityError, PhaseOverflow

    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EigenvalueNearMinusOne, PhaseOverflow) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (UnknownFormatTag, StructuralMismatch, NonFiniteValue,
            IncompatibleAdapters, OrthogonalityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STRUCTURE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # remaining ValueErrors are parameter values the library rejected
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        # a numerical invariant the run was supposed to demonstrate failed
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
