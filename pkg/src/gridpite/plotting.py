"""Figure rendering for the report paths (saved next to the CSV outputs)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def trajectory_figure(rows, path: Path, n_weights: int = 4, title: str = "") -> None:
    """Eigenstate weights and success probability against the step index."""
    steps = [r.step for r in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for i in range(min(n_weights, len(rows[0].weights) if rows else 0)):
        ax.plot(steps, [r.weights[i] for r in rows], marker="o", ms=3,
                label=f"state {i}")
    ax.plot(steps, [r.p_success for r in rows], ls="--", color="gray",
            label="success prob.")
    ax.plot(steps, [r.p_cumulative for r in rows], ls=":", color="black",
            label="cumulative prob.")
    ax.set_xlabel("step")
    ax.set_ylabel("weight / probability")
    ax.set_ylim(-0.02, 1.05)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def spectrum_figure(b_values, levels_by_b, path: Path,
                    analytic_by_b=None, title: str = "") -> None:
    """Eigenvalues against the field strength, optionally with the analytic
    levels as lines."""
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    for b, levels in zip(b_values, levels_by_b):
        ax.plot([b] * len(levels), levels, "o", ms=4, color="tab:blue")
    if analytic_by_b is not None:
        arr = np.asarray(analytic_by_b)
        for i in range(arr.shape[1]):
            ax.plot(b_values, arr[:, i], "-", lw=0.8, color="tab:orange")
    ax.set_xlabel("B (T)")
    ax.set_ylabel("energy (meV)")
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def quiver_figure(x, y, jx, jy, path: Path, density=None, grid_n: int = 0,
                  title: str = "") -> None:
    """Current-density arrows over the cell, optionally on a density map."""
    fig, ax = plt.subplots(figsize=(5.0, 4.6))
    if density is not None and grid_n:
        img = np.asarray(density).reshape(grid_n, grid_n)
        ax.imshow(img, origin="lower", cmap="Blues",
                  extent=(min(x), max(x), min(y), max(y)), alpha=0.7)
    stride = max(1, int(np.sqrt(len(x))) // 16)
    n = int(np.sqrt(len(x)))
    sel = (np.arange(n * n).reshape(n, n)[::stride, ::stride]).reshape(-1)
    ax.quiver(np.asarray(x)[sel], np.asarray(y)[sel], np.asarray(jx)[sel],
              np.asarray(jy)[sel], angles="xy")
    ax.set_xlabel("x (nm)")
    ax.set_ylabel("y (nm)")
    ax.set_aspect("equal")
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def sweep_figure(rows, path: Path, title: str = "") -> None:
    """Post-filtration weights against the swept energy error, per order."""
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    orders = sorted({r["order"] for r in rows})
    for order in orders:
        sub = [r for r in rows if r["order"] == order]
        de = [r["dE5"] for r in sub]
        ax.semilogy(de, [max(r["weight_phi5"], 1e-30) for r in sub], "o-",
                    label=f"state-5 weight, order {order}")
        ax.semilogy(de, [max(r["weight_phi2"], 1e-30) for r in sub], "s--",
                    label=f"state-2 weight, order {order}")
    ax.set_xlabel("energy error (meV)")
    ax.set_ylabel("weight after filtration")
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
