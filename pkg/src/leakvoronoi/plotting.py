"""Matplotlib figures written next to an evaluation report (Agg backend, files only)."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .evaluation import ConfusionMatrix, InvalidAnalysis  # noqa: E402
from .geometry import CellPolyhedron, clip_to_surface  # noqa: E402
from .predictors import format_label, format_tuple  # noqa: E402


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    # drop the timestamp so output is stable across runs
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_confusion(cm: ConfusionMatrix, path: str | Path, title: str = "") -> Path:
    values = cm.values
    n_rows, n_cols = values.shape
    size = max(4.0, 0.35 * n_cols + 2)
    fig, ax = plt.subplots(figsize=(size, max(3.5, 0.35 * n_rows + 2)))
    im = ax.imshow(values, cmap="viridis", aspect="auto", vmin=0, vmax=None if cm.normalization is None else 1)
    ax.set_xticks(range(n_cols), [format_label(c) for c in cm.columns], rotation=90, fontsize=7)
    ax.set_yticks(range(n_rows), [format_label(r) for r in cm.labels], fontsize=7)
    ax.set_xlabel("predicted cell")
    ax.set_ylabel("true cell")
    ax.set_title(title or f"confusion ({cm.normalization or 'counts'})")
    fig.colorbar(im, ax=ax)
    return _save(fig, Path(path))


def plot_map(
    surface: np.ndarray,
    cells: Sequence[tuple[tuple[int, ...], CellPolyhedron]],
    sites: np.ndarray,
    leaks_ok: np.ndarray,
    leaks_bad: np.ndarray,
    path: str | Path,
    title: str = "",
) -> Path:
    """Cells clipped to the surface with correct (circle) and wrong (cross) leaks."""
    lo, hi = surface.min(axis=0), surface.max(axis=0)
    aspect = (hi[1] - lo[1]) / max(hi[0] - lo[0], 1e-12)
    fig, ax = plt.subplots(figsize=(10, max(2.5, 10 * aspect + 1)))
    for label, cell in cells:
        poly = clip_to_surface(cell, surface)
        if len(poly):
            ax.fill(poly[:, 0], poly[:, 1], alpha=0.35, edgecolor="0.3", linewidth=0.8)
    closed = np.vstack([surface, surface[:1]])
    ax.plot(closed[:, 0], closed[:, 1], "k-", linewidth=1.5)
    ax.plot(sites[:, 0], sites[:, 1], "ko", markersize=5)
    for i, p in enumerate(sites):
        ax.annotate(str(i + 1), p, textcoords="offset points", xytext=(3, 3), fontsize=8)
    if len(leaks_ok):
        ax.plot(leaks_ok[:, 0], leaks_ok[:, 1], "o", mfc="none", color="tab:green", markersize=4, label="correct")
    if len(leaks_bad):
        ax.plot(leaks_bad[:, 0], leaks_bad[:, 1], "x", color="tab:red", markersize=5, label="incorrect")
    if len(leaks_ok) or len(leaks_bad):
        ax.legend(loc="upper right", fontsize=8)
    ax.set_aspect("equal")
    ax.set_xlabel("y1 [m]")
    ax.set_ylabel("y2 [m]")
    ax.set_title(title)
    return _save(fig, Path(path))


def plot_invalid_histogram(analysis: InvalidAnalysis, path: str | Path) -> Path:
    labels = [format_tuple(t) for t in analysis.histogram]
    counts = list(analysis.histogram.values())
    fig, ax = plt.subplots(figsize=(max(4.0, 0.3 * len(labels) + 2), 3.5))
    ax.bar(range(len(counts)), counts, color="tab:purple")
    ax.set_xticks(range(len(labels)), labels, rotation=90, fontsize=7)
    ax.set_ylabel("count")
    ax.set_title(f"invalid predictions ({analysis.total})")
    return _save(fig, Path(path))
