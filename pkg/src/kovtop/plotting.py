"""Figure rendering and plot-script emission for the CLI report path.

Figures are rendered with the Agg backend straight to PNG next to the CSV;
a plain-text gnuplot script referencing the same CSV is emitted as well so
the plots can be regenerated without this package.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["render_trajectory_figure", "render_residual_figure", "write_plot_script"]


def render_trajectory_figure(path: Path, t, states, s1=None, s2=None) -> None:
    """Angular velocity, vertical cosines and optionally (s1, s2) vs time."""
    nrows = 3 if s1 is not None else 2
    fig, axes = plt.subplots(nrows, 1, figsize=(8.0, 2.6 * nrows), sharex=True)
    for idx, lab in ((0, "p"), (1, "q"), (2, "r")):
        axes[0].plot(t, states[:, idx], lw=0.8, label=lab)
    axes[0].set_ylabel("angular velocity")
    axes[0].legend(loc="upper right", ncol=3, fontsize=8)
    for idx, lab in ((3, "gamma"), (4, "gamma'"), (5, "gamma''")):
        axes[1].plot(t, states[:, idx], lw=0.8, label=lab)
    axes[1].set_ylabel("vertical cosines")
    axes[1].legend(loc="upper right", ncol=3, fontsize=8)
    if s1 is not None:
        axes[2].plot(t, np.real(s1), lw=0.8, label="s1")
        s2c = np.clip(np.real(s2), -20.0, None)
        axes[2].plot(t, s2c, lw=0.8, label="s2 (clipped)")
        axes[2].set_ylabel("separation variables")
        axes[2].legend(loc="upper right", ncol=2, fontsize=8)
    axes[-1].set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_residual_figure(path: Path, names, values, *, title, logscale=True) -> None:
    """Bar chart of named residuals."""
    fig, ax = plt.subplots(figsize=(7.0, 3.2))
    vals = np.maximum(np.abs(np.asarray(values, dtype=float)), 1e-18)
    ax.bar(range(len(names)), vals, color="#4878a8")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    if logscale:
        ax.set_yscale("log")
    ax.set_title(title, fontsize=10)
    ax.set_ylabel("|residual|")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def write_plot_script(path: Path, csv_name: str, columns: list[str]) -> None:
    """gnuplot script reproducing the state plot from the CSV."""
    lines = [
        "# gnuplot script; run:  gnuplot " + path.name,
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel 't'",
        f"set output '{csv_name}.png'",
        "set terminal pngcairo size 900,600",
    ]
    plot_cols = ", ".join(
        f"'{csv_name}' using 1:{i + 2} with lines" for i in range(len(columns) - 1)
    )
    lines.append("plot " + plot_cols)
    path.write_text("\n".join(lines) + "\n")
