"""Static figures for the report path.

Figures are written next to the CSV tables they are drawn from.  PNG
metadata is stripped so identical inputs give identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.6),
    "figure.dpi": 100,
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.bbox": "tight",
}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_base_rank(table: Sequence[tuple[int, int]], path: str | Path, title: str = "") -> Path:
    """Out-degree of each funnel base against its fitness rank."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if table:
            ranks, degs = zip(*table)
            ax.bar(ranks, degs, color="tab:blue", width=0.8)
        ax.set_xlabel("fitness rank of funnel base (1 = best)")
        ax.set_ylabel("out-degree")
        if title:
            ax.set_title(title)
        return _save(fig, path)


def plot_rcc(curve: Sequence[tuple[int, float]], path: str | Path, title: str = "") -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if curve:
            ks, vals = zip(*curve)
            ax.plot(ks, vals, marker="o", ms=3, color="tab:red")
        ax.set_xlabel("out-degree threshold k")
        ax.set_ylabel("rich-club coefficient")
        if title:
            ax.set_title(title)
        return _save(fig, path)


def plot_similarity(matrix: np.ndarray, labels: Sequence[str], path: str | Path) -> Path:
    n = len(labels)
    size = max(4.0, 0.25 * n + 2)
    with plt.rc_context({**STYLE, "figure.figsize": (size, size * 0.85)}):
        fig, ax = plt.subplots()
        im = ax.imshow(matrix, vmin=-1, vmax=1, cmap="RdBu_r")
        ax.set_xticks(range(n), labels, rotation=90, fontsize=6)
        ax.set_yticks(range(n), labels, fontsize=6)
        fig.colorbar(im, ax=ax, label="PCC")
        return _save(fig, path)


def plot_stability(levels: Sequence[tuple[int, Sequence[float], Sequence[float]]], path: str | Path) -> Path:
    """Box plots of AC and ACC across resamples, one box per subset size."""
    with plt.rc_context({**STYLE, "figure.figsize": (7.0, 3.4)}):
        fig, (ax1, ax2) = plt.subplots(1, 2)
        pos = [lv[0] for lv in levels]
        ax1.boxplot([list(lv[1]) or [np.nan] for lv in levels], positions=pos)
        ax2.boxplot([list(lv[2]) for lv in levels], positions=pos)
        ax1.set_ylabel("AC")
        ax2.set_ylabel("ACC")
        for ax in (ax1, ax2):
            ax.set_xlabel("i (runs merged = step * i)")
        return _save(fig, path)
