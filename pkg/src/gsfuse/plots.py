"""Figure rendering for the report commands.

Each function takes the same row lists the CSV writers consume and saves
a PNG next to the delimited output, using the non-interactive backend so
the commands work in headless environments.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import CheckResult, OrderFit


def plot_spectrum(rows, path) -> None:
    """Unit-circle scatter of block eigenvalues, one color per factor."""
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    circle = np.linspace(0.0, 2.0 * np.pi, 256)
    ax.plot(np.cos(circle), np.sin(circle), color="0.8", lw=1.0, zorder=0)
    for factor, color in (("left", "tab:blue"), ("right", "tab:orange")):
        xs = [r[4] for r in rows if r[0] == factor]
        ys = [r[5] for r in rows if r[0] == factor]
        ax.scatter(xs, ys, s=22, color=color, label=factor, alpha=0.8)
    ax.set_xlabel("real part")
    ax.set_ylabel("imaginary part")
    ax.set_aspect("equal")
    ax.legend(loc="upper left", fontsize=8)
    ax.set_title("block eigenvalues")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_trajectory(rows, path) -> None:
    """Chord length per segment along the merge curve."""
    mids = [0.5 * (r[1] + r[2]) for r in rows]
    chords = [r[3] for r in rows]
    fig, ax = plt.subplots(figsize=(6.0, 3.5))
    ax.plot(mids, chords, marker="o", ms=4)
    ax.set_xlabel("t (segment midpoint)")
    ax.set_ylabel("chord length")
    ax.set_ylim(bottom=0.0)
    ax.set_title("per-step movement along the merge curve")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_verify(results: list[CheckResult], fits: dict[str, OrderFit],
                path) -> None:
    """Check outcomes as bars, plus log-log fit lines when orders ran."""
    ncols = 2 if fits else 1
    fig, axes = plt.subplots(1, ncols, figsize=(5.5 * ncols, 4.0))
    ax = axes[0] if fits else axes
    names = [r.name for r in results]
    values = [max(abs(r.measured), 1e-17) for r in results]
    colors = ["tab:green" if r.passed else "tab:red" for r in results]
    ax.barh(range(len(results)), values, color=colors)
    ax.set_yticks(range(len(results)))
    ax.set_yticklabels(names, fontsize=7)
    ax.set_xscale("log")
    ax.invert_yaxis()
    ax.set_xlabel("measured (green = pass)")
    ax.set_title("checks")
    if fits:
        ax2 = axes[1]
        for name, fit in fits.items():
            xs = np.array([p[0] for p in fit.points])
            ys = np.array([p[1] for p in fit.points])
            line = ax2.plot(xs, ys, "o", ms=4,
                            label=f"{name} (slope {fit.slope:.2f})")[0]
            ax2.plot(xs, fit.slope * xs + fit.intercept, "-",
                     color=line.get_color(), lw=1.0)
        ax2.set_xlabel("log epsilon")
        ax2.set_ylabel("log error")
        ax2.legend(fontsize=7)
        ax2.set_title("convergence-order fits")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
