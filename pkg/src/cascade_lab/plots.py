"""Figure rendering for CLI reports (PNG files next to the CSV/JSON output)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_DPI = 150


def save_heatmap(
    t_values,
    x_values,
    grid_values,
    path,
    *,
    title: str,
    xlabel: str = "x",
    ylabel: str = "t",
    cbar_label: str = "value",
) -> str:
    """Render a row-major grid (rows indexed by t) as a heatmap PNG."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    mesh = ax.pcolormesh(x_values, t_values, grid_values, shading="nearest")
    fig.colorbar(mesh, ax=ax, label=cbar_label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return str(path)


def save_residual_bars(labels, values, path, *, title: str) -> str:
    """Log-scale bar chart of named residual magnitudes."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    floor = 1e-17
    ax.bar(range(len(labels)), [max(abs(v), floor) for v in values])
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_yscale("log")
    ax.set_ylabel("max |residual|")
    ax.set_title(title)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return str(path)
