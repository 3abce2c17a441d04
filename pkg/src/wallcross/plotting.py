"""Figures of rank-2 scattering diagrams."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "wallcross"
import matplotlib.pyplot as plt  # noqa: E402

from .scattering import LINE, ScatteringDiagram  # noqa: E402
from .series import format_series  # noqa: E402


def plot_diagram(d: ScatteringDiagram, path, extent: float = 3.0, labels: bool = True,
                 names=("x", "y")):
    """Draw every element as a straight segment clipped to a square window.

    The output format follows the file suffix (png, svg, pdf).
    """
    fig, ax = plt.subplots(figsize=(5, 5))
    for el in d.sorted_elements():
        bx, by = float(el.base[0]), float(el.base[1])
        ux, uy = el.direction
        norm = (ux * ux + uy * uy) ** 0.5
        ux, uy = ux / norm, uy / norm
        lo = -2 * extent if el.kind == LINE else 0.0
        hi = 2 * extent
        style = "-" if el.kind == LINE else "--"
        ax.plot([bx + lo * ux, bx + hi * ux], [by + lo * uy, by + hi * uy], style, lw=1.2, color="k")
        if labels:
            lx, ly = bx + 0.8 * extent * ux, by + 0.8 * extent * uy
            text = format_series(el.function, list(names)).replace("*", "")
            if len(text) > 28:
                text = text[:25] + "..."
            ax.annotate(text, (lx, ly), fontsize=6, color="tab:blue")
    ax.set_xlim(-extent, extent)
    ax.set_ylim(-extent, extent)
    ax.set_aspect("equal")
    ax.axhline(0, color="0.85", lw=0.5, zorder=0)
    ax.axvline(0, color="0.85", lw=0.5, zorder=0)
    ax.set_title(f"{len(d.elements)} elements mod t^{d.trunc.order + 1}", fontsize=9)
    fig.tight_layout()
    # fixed metadata keeps repeated renders byte-identical
    metadata = {"Software": None} if str(path).endswith(".png") else {"Date": None} if str(path).endswith(".svg") else None
    if str(path).endswith(".pdf"):
        metadata = {"CreationDate": None}
    fig.savefig(path, metadata=metadata)
    plt.close(fig)
    return path
