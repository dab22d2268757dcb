"""Figure builders: semilog residual curves and density heatmaps."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .io import read_field, read_history


def plot_convergence(csv_paths, labels=None, out_path="convergence.png"):
    """Residual (log scale) vs. iteration count, one curve per run history."""
    if labels is None:
        labels = [str(p) for p in csv_paths]
    if len(labels) != len(csv_paths):
        raise ValueError("need one label per CSV path")
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for path, label in zip(csv_paths, labels):
        hist = read_history(path)
        ax.semilogy(hist.iters, hist.residuals, label=label)
        switch = next(
            (i for i, ph in enumerate(hist.phases) if ph == "shifted"), None
        )
        if switch:
            ax.axvline(hist.iters[switch], color="gray", lw=0.6, ls=":")
    ax.set_xlabel("iteration")
    ax.set_ylabel(r"$L^2$ residual")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150, metadata={"Date": None})
    plt.close(fig)
    return out_path


def plot_density(field_csv, out_path="density.png"):
    """Heatmap of |u|^2 = re^2 + im^2 on the node grid."""
    grid = read_field(field_csv)
    fig, ax = plt.subplots(figsize=(5.4, 4.6))
    im = ax.pcolormesh(grid.xs, grid.ys, grid.density, shading="gouraud", cmap="viridis")
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    fig.colorbar(im, ax=ax, label=r"$|u|^2$")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150, metadata={"Date": None})
    plt.close(fig)
    return out_path
