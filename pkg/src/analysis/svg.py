"""
SVG Scatter Export

Standalone, byte-deterministic SVG rendering of a 2D map with matplotlib:
circles for models, squares for tasks, one color per class and a legend.

Author: CapMap Project
License: MIT
"""

import io
from typing import Optional, Sequence

import matplotlib
import numpy as np
from matplotlib.figure import Figure
from matplotlib.lines import Line2D

from ..embedder.space import EntityKind

PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]

MARKERS = {EntityKind.MODEL: "o", EntityKind.TASK: "s"}
FIGSIZE = (10.0, 7.5)
MARKER_SIZE = 7.0

# Fixed id salt and live text keep the output stable and searchable
SVG_RC = {"svg.hashsalt": "capmap", "svg.fonttype": "none"}


def render_scatter(
    points2d,
    labels: Sequence[str],
    classes: Sequence[str],
    kinds: Optional[Sequence[EntityKind]] = None,
    title: str = "",
) -> str:
    """
    Render labelled points as an SVG document.

    Point i is drawn in a group with id "marker-i" and, when its label is
    not empty, labelled in a group with id "label-i". Legend entries follow
    the sorted class names and carry ids "legend-k". Colors depend only on
    the class names, so identical inputs give identical bytes.

    Args:
        points2d: (n, 2) planar coordinates
        labels: Text label per point
        classes: Display class per point
        kinds: Model or task per point (default: all models)
        title: Optional title text

    Raises:
        ValueError: If there are no points or the sequences disagree in length
    """
    coords = np.asarray(points2d, dtype=np.float64).reshape(-1, 2)
    n = len(coords)
    if n == 0:
        raise ValueError("render_scatter needs at least one point")
    kinds = [EntityKind(k) for k in kinds] if kinds is not None else [EntityKind.MODEL] * n
    if not (len(labels) == len(classes) == len(kinds) == n):
        raise ValueError("points, labels, classes and kinds must have equal length")

    names = sorted(set(classes))
    palette = {cls: PALETTE[i % len(PALETTE)] for i, cls in enumerate(names)}

    with matplotlib.rc_context(SVG_RC):
        fig = Figure(figsize=FIGSIZE)
        ax = fig.add_subplot()
        for i, ((x, y), label, cls, kind) in enumerate(zip(coords, labels, classes, kinds)):
            ax.plot(
                [x], [y], linestyle="", marker=MARKERS[kind], markersize=MARKER_SIZE,
                color=palette[cls], gid=f"marker-{i}",
            )
            if label:
                ax.annotate(
                    label, (x, y), xytext=(4, 4), textcoords="offset points", fontsize=8, gid=f"label-{i}",
                )

        handles = [
            Line2D([], [], linestyle="", marker="o", markersize=MARKER_SIZE, color=palette[cls], label=cls)
            for cls in names
        ]
        legend = ax.legend(handles=handles, loc="upper left", bbox_to_anchor=(1.02, 1.0), fontsize=8)
        for k, text in enumerate(legend.get_texts()):
            text.set_gid(f"legend-{k}")

        ax.set_aspect("equal", adjustable="datalim")
        ax.set_xticks([])
        ax.set_yticks([])
        if title:
            ax.set_title(title)
        fig.subplots_adjust(left=0.03, right=0.75, bottom=0.03, top=0.93)

        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()
