"""Matplotlib figures for simulation outputs.

Three figure builders, one per file kind: density traces over time,
a corridor snapshot with agents colored by status, and a heatmap of
single-intervention sweep scores.  Every builder returns the Figure and
saves it when ``out`` is given, so they work both from the CLI and from
an interactive session.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # file output only; never require a display

import matplotlib.pyplot as plt
import numpy as np

from .io import PlotDataError

# Status palette: 1 moving, 2 doubting, 3 going back, 4 staying.
STATUS_COLORS = {1: "blue", 2: "magenta", 3: "red", 4: "black"}
STATUS_NAMES = {1: "moving", 2: "doubting", 3: "going back", 4: "staying"}

DPI = 150


def _save(fig, out: str | Path | None):
    if out is not None:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, dpi=DPI)
    return fig


def _smooth(x: np.ndarray, width: int) -> np.ndarray:
    if width <= 1:
        return x
    kernel = np.ones(width) / width
    return np.convolve(x, kernel, mode="same")


def plot_densities(
    data: dict[str, np.ndarray],
    out: str | Path | None = None,
    smooth_width: int = 1,
    title: str | None = None,
):
    """One panel, four labeled curves: density per region against time."""
    t = data["t"]
    rho = data["rho"]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for i in range(4):
        ax.plot(t, _smooth(rho[:, i], smooth_width), label=f"region {i + 1}", lw=1.2)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("density (p/m$^2$)")
    ax.set_xlim(t[0], t[-1])
    ax.set_ylim(bottom=0)
    ax.legend(loc="upper left")
    ax.grid(alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, out)


def plot_frame(
    data: dict[str, np.ndarray],
    out: str | Path | None = None,
    length: float = 130.0,
    height: float = 10.0,
    title: str | None = None,
):
    """Corridor snapshot: dots colored by status, leaders circled."""
    fig, ax = plt.subplots(figsize=(10, 10 * (height + 4) / (length + 10)))
    ax.add_patch(
        plt.Rectangle((0, 0), length, height, fill=False, edgecolor="0.4", lw=1.5)
    )
    for status, color in STATUS_COLORS.items():
        mask = data["status"] == status
        if not mask.any():
            continue
        ax.scatter(
            data["x"][mask],
            data["y"][mask],
            s=12,
            c=color,
            label=f"{STATUS_NAMES[status]} ({int(mask.sum())})",
            linewidths=0,
        )
    leaders = data["is_leader"] == 1
    if leaders.any():
        ax.scatter(
            data["x"][leaders],
            data["y"][leaders],
            s=60,
            facecolors="none",
            edgecolors="0.3",
            linewidths=0.8,
            label="leaders",
        )
    ax.set_xlim(min(-2.0, data["x"].min() - 2.0), length + 2.0)
    ax.set_ylim(-2.0, height + 2.0)
    ax.set_aspect("equal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.legend(loc="upper left", ncols=3, fontsize=8, framealpha=0.9)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, out)


def plot_sweep(rows: list[dict], out: str | Path | None = None, title: str | None = None):
    """Heatmap of the sweep objective for single-intervention plans.

    Rows with two or more interventions (or none) do not fit a
    position-by-time grid and are skipped; failed plans show as blanks.
    """
    singles = [r for r in rows if len(r["cips"]) == 1]
    if not singles:
        raise PlotDataError("no single-intervention rows to plot")
    positions = sorted({r["cips"][0][0] for r in singles})
    times = sorted({r["cips"][0][1] for r in singles})
    grid = np.full((len(times), len(positions)), np.nan)
    for r in singles:
        if r["status"] != "ok":
            continue
        x, t = r["cips"][0]
        grid[times.index(t), positions.index(x)] = r["objective"]

    fig, ax = plt.subplots(figsize=(8, 4.5))
    mesh = ax.imshow(grid, origin="lower", aspect="auto", cmap="viridis")
    ax.set_xticks(range(len(positions)), [f"{p:g}" for p in positions])
    ax.set_yticks(range(len(times)), [f"{t:g}" for t in times])
    ax.set_xlabel("intervention position (m)")
    ax.set_ylabel("intervention time (s)")
    fig.colorbar(mesh, ax=ax, label="objective")
    if np.isfinite(grid).any():
        best = np.unravel_index(np.nanargmin(grid), grid.shape)
        ax.plot(best[1], best[0], marker="*", ms=14, c="white", mec="black")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, out)
