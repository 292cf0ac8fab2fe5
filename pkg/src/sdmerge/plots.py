"""Matplotlib figure rendering for the CLI report paths.

Figures are written next to the delimited outputs; nothing is shown
interactively.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .ctm import Trajectory

_LINK_NAMES = {1: "upstream link 1", 2: "upstream link 2", 3: "downstream link 3"}


def save_density_contours(traj: Trajectory, out_dir: str, stem: str = "density") -> list[str]:
    """Space-time density field per link, one PNG each."""
    paths = []
    times = np.asarray(traj.times)
    for link_id in (1, 2, 3):
        field = traj.densities[link_id]
        n_cells = field.shape[1]
        dx = traj.dx[link_id - 1]
        x = (np.arange(n_cells) + 0.5) * dx
        fig, ax = plt.subplots(figsize=(6, 4))
        mesh = ax.pcolormesh(x, times, field, shading="nearest", cmap="viridis")
        fig.colorbar(mesh, ax=ax, label="density")
        ax.set_xlabel("position along link")
        ax.set_ylabel("time")
        ax.set_title(_LINK_NAMES[link_id])
        path = os.path.join(out_dir, f"{stem}_link{link_id}.png")
        fig.savefig(path, dpi=120, bbox_inches="tight")
        plt.close(fig)
        paths.append(path)
    return paths


def save_flux_series(
    traj: Trajectory,
    out_dir: str,
    stem: str = "junction_fluxes",
    exact: tuple[float, float, float] | None = None,
) -> str:
    """Junction flux evolution, optionally with the exact Riemann fluxes."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for series, label in ((traj.q1, "q1"), (traj.q2, "q2"), (traj.q3, "q3")):
        ax.plot(traj.step_times, series, label=label)
    if exact is not None:
        for value, label in zip(exact, ("q1", "q2", "q3")):
            ax.axhline(value, linestyle="--", linewidth=0.8, color="gray")
    ax.set_xlabel("time")
    ax.set_ylabel("flux")
    ax.legend()
    ax.set_title("junction fluxes")
    path = os.path.join(out_dir, f"{stem}.png")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def save_convergence(rows, t_probe: float, out_dir: str, stem: str = "convergence") -> str:
    """L1 difference (or error) against cell count, log-log."""
    cells = [r.cells for r in rows]
    values = [max(r.value, 1e-300) for r in rows]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(cells, values, "o-")
    ax.set_xlabel("cells per link")
    ax.set_ylabel(f"L1 difference at t = {t_probe:g}")
    ax.set_title("grid refinement")
    path = os.path.join(out_dir, f"{stem}.png")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def save_regions(
    d1: np.ndarray,
    d2: np.ndarray,
    q1: np.ndarray,
    q2: np.ndarray,
    suboptimal: np.ndarray,
    s3: float,
    out_dir: str,
    stem: str = "regions",
) -> str:
    """Flux solutions over the (D1, D2) plane: arrows from demands to fluxes."""
    fig, ax = plt.subplots(figsize=(5.5, 5))
    ax.quiver(
        d1,
        d2,
        q1 - d1,
        q2 - d2,
        angles="xy",
        scale_units="xy",
        scale=1.0,
        width=0.0025,
        color=np.where(suboptimal, "crimson", "steelblue"),
    )
    lim = max(d1.max(), d2.max(), s3)
    line = np.linspace(0.0, lim, 64)
    ax.plot(line, s3 - line, "k--", linewidth=0.8, label="D1 + D2 = S3")
    ax.set_xlim(0, lim * 1.05)
    ax.set_ylim(0, lim * 1.05)
    ax.set_xlabel("D1")
    ax.set_ylabel("D2")
    ax.legend(loc="upper right")
    ax.set_title("merge flux solutions (red: q3 below optimum)")
    path = os.path.join(out_dir, f"{stem}.png")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path
