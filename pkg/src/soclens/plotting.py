"""Matplotlib summaries of a window sweep: a per-window CSV, an overview
figure and a colourspace legend."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .colorspace import DEFAULT_GAMMA, map2d
from .graph import BehaviourGraph
from .trace import ImpliedKind

# no timestamps or version strings in saved files
_PNG_META = {"Software": None}
_RC = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.dpi": 100,
}


def colourspace_image(n: int = 256, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
    """``(n, n, 3)`` uint8 image; row 0 is b = 1 so the origin sits bottom-left."""
    grid = np.linspace(0.0, 1.0, n)
    img = np.empty((n, n, 3), dtype=np.uint8)
    for i, b in enumerate(grid[::-1]):
        for j, a in enumerate(grid):
            img[i, j] = map2d(float(a), float(b), gamma)
    return img


def plot_colourspace(path, gamma: float = DEFAULT_GAMMA, n: int = 128) -> Path:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(3.2, 3.0))
        ax.imshow(colourspace_image(n, gamma), extent=(0, 1, 0, 1), interpolation="nearest")
        ax.set_xlabel("first value (windowed / dep)")
        ax.set_ylabel("second value (global / cov)")
        ax.set_title(f"colourspace, gamma={gamma:g}")
        fig.tight_layout()
        fig.savefig(path, metadata=_PNG_META)
        plt.close(fig)
    return Path(path)


def plot_sweep(graphs: Sequence[BehaviourGraph], path, kind: ImpliedKind = ImpliedKind.LEVEL) -> Path:
    """Edge count per window above a heatmap of each node's windowed expectation."""
    names = [n.id.name for n in graphs[0].nodes] if graphs else []
    centres = [(g.window.u + g.window.v) / 2 for g in graphs]
    heat = np.array([[n.ex_window[kind] for n in g.nodes] for g in graphs]).T if graphs else np.zeros((0, 0))
    with plt.rc_context(_RC):
        fig, (top, bottom) = plt.subplots(
            2, 1, figsize=(7, 2 + 0.22 * max(len(names), 4)), sharex=True,
            gridspec_kw={"height_ratios": [1, 2.5]},
        )
        top.step(centres, [len(g.edges) for g in graphs], where="mid", color="k", lw=1)
        top.set_ylabel("edges")
        if graphs:
            half = (graphs[0].window.v - graphs[0].window.u) / 2
            extent = (centres[0] - half, centres[-1] + half, len(names) - 0.5, -0.5)
            im = bottom.imshow(heat, aspect="auto", cmap="Greys", vmin=0, vmax=1,
                               extent=extent, interpolation="nearest")
            fig.colorbar(im, ax=bottom, label=f"E[{kind.label}] in window", pad=0.01)
            bottom.set_yticks(range(len(names)))
            bottom.set_yticklabels(names)
        bottom.set_xlabel("cycle (window centre)")
        fig.tight_layout()
        fig.savefig(path, metadata=_PNG_META)
        plt.close(fig)
    return Path(path)


def write_summary(graphs: Sequence[BehaviourGraph], out_dir, gamma: float = DEFAULT_GAMMA) -> list[Path]:
    """``summary.csv`` (one row per window), ``summary.png`` and ``colourspace.png``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = out / "summary.csv"
    with table.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["frame", "u", "v", "nodes", "edges", "mean_dep", "mean_cov"])
        for k, g in enumerate(graphs):
            deps = [e.dep for e in g.edges]
            covs = [e.cov for e in g.edges]
            w.writerow([
                k, g.window.u, g.window.v, len(g.nodes), len(g.edges),
                f"{np.mean(deps):.6f}" if deps else "",
                f"{np.mean(covs):.6f}" if covs else "",
            ])
    return [table, plot_sweep(graphs, out / "summary.png"), plot_colourspace(out / "colourspace.png", gamma)]
