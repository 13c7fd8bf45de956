"""PNG figures for CLI runs.

Figures are rendered with the Agg backend and saved without version
metadata so identical inputs give identical bytes.
"""

from __future__ import annotations

import io
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import atomic_write_bytes  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.6),
    "figure.dpi": 100,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
    "savefig.bbox": "tight",
}


def _save(fig, path: str | os.PathLike) -> None:
    buf = io.BytesIO()
    fig.savefig(buf, format="png", metadata={"Software": None})
    plt.close(fig)
    atomic_write_bytes(path, buf.getvalue())


def plot_curves(x: np.ndarray, curves: dict[str, np.ndarray], path, xlabel: str = "x", title: str = "") -> None:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, y in curves.items():
            ax.plot(x, y, label=label)
        ax.set_xlabel(f"${xlabel}$")
        if title:
            ax.set_title(title)
        if len(curves) > 1:
            ax.legend(frameon=False)
        _save(fig, path)


def plot_field(values: np.ndarray, extent: tuple[float, float, float, float], path, labels=("x", "t"), title: str = "") -> None:
    """Heat map of a 2-D array whose first axis is the vertical coordinate."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        im = ax.imshow(values, origin="lower", aspect="auto", extent=extent, cmap="viridis", interpolation="nearest")
        fig.colorbar(im, ax=ax, label="$u$")
        ax.set_xlabel(f"${labels[0]}$")
        ax.set_ylabel(f"${labels[1]}$")
        ax.grid(False)
        if title:
            ax.set_title(title)
        _save(fig, path)


def plot_margins(reports: list, path, title: str = "") -> None:
    """Margin over tolerance per report; points below -1 are failures."""
    ratio, colors = [], []
    for r in reports:
        tol = r.tolerance if r.tolerance > 0 else 1e-16
        m = r.margin / tol
        if not np.isfinite(m):
            continue
        counted = getattr(r, "applicable", None)
        counted = counted if counted is not None else r.counts
        ratio.append(np.sign(m) * np.log10(1.0 + abs(m)))
        colors.append("C0" if counted else "0.6")
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.scatter(np.arange(len(ratio)), ratio, s=6, c=colors)
        ax.axhline(-np.log10(2.0), color="C3", lw=0.8)
        ax.set_xlabel("report")
        ax.set_ylabel("signed log10(1 + |margin/tol|)")
        if title:
            ax.set_title(title)
        _save(fig, path)
