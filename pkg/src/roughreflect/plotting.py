"""Figure rendering for solver traces and sweep reports.

Everything draws through the Agg backend and writes straight to a file,
so the package stays usable on headless machines.  Staircase paths are
drawn with post-step lines, matching the right-continuous convention.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .paths import GridPath

__all__ = ["plot_paths", "plot_values"]


def plot_paths(
    file: str,
    traces: dict[str, GridPath],
    title: str = "",
    barrier: GridPath | None = None,
) -> None:
    """Draw each named path, one line per component, barrier dashed behind."""
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    if barrier is not None:
        for j in range(barrier.values.shape[1]):
            ax.step(
                barrier.grid.times,
                barrier.values[:, j],
                where="post",
                color="0.6",
                linestyle="--",
                label="barrier" if j == 0 else None,
            )
    for name, path in traces.items():
        values = path.values
        for j in range(values.shape[1]):
            label = name if values.shape[1] == 1 else f"{name}[{j}]"
            ax.step(path.grid.times, values[:, j], where="post", label=label)
    ax.set_xlabel("t")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    fig.savefig(file, dpi=120)
    plt.close(fig)


def plot_values(
    file: str,
    values: np.ndarray,
    title: str = "",
    ylabel: str = "",
    threshold: float | None = None,
) -> None:
    """Per-run scalars as a stem plot, with an optional reference level."""
    values = np.asarray(values, dtype=float)
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    ax.stem(np.arange(values.size), values)
    if threshold is not None:
        ax.axhline(threshold, color="0.5", linestyle="--", label=f"level {threshold:g}")
        ax.legend(loc="best", fontsize="small")
    ax.set_xlabel("run")
    if ylabel:
        ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(file, dpi=120)
    plt.close(fig)
