"""
SVG rendering of contour plots and plabic graphs.

Figures are drawn with the Agg backend, a fixed SVG hash salt and no date
metadata, so repeated runs produce identical files.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Polygon  # noqa: E402

import config  # noqa: E402

# Configure logging
logger = logging.getLogger(__name__)

VERTEX_COLORS = {
    "black": "black",
    "white": "white",
    "boundary": "#888888",
    "crossing": "#d62728",
}


def _figure():
    plt.rcParams["svg.hashsalt"] = config.SVG["hashsalt"]
    fig, ax = plt.subplots(figsize=config.SVG["figsize"])
    ax.set_aspect("equal", "box")
    ax.axis("off")
    return fig, ax


def _save(fig, path: Path):
    path = Path(path)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info(f"Wrote {path}")


def _shade(basis) -> str:
    palette = config.SVG["palette"]
    return palette[sum(i * i for i in basis) % len(palette)]


def _centroid(points) -> Tuple[float, float]:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return sum(xs) / len(xs), sum(ys) / len(ys)


def render_contour(plot: Dict[str, Any], path: Path):
    """
    Draw a contour plot from its JSON form: shaded regions labelled by their
    dominant basis, edges as black segments annotated with their type.
    """
    fig, ax = _figure()
    xmin, xmax, ymin, ymax = plot["bbox"]
    for region in plot["regions"]:
        basis = region["basis"]
        ax.add_patch(Polygon(region["polygon"], closed=True, facecolor=_shade(basis), edgecolor="none"))
        cx, cy = _centroid(region["polygon"])
        ax.text(cx, cy, "".join(str(i) for i in basis), ha="center", va="center", fontsize=config.SVG["font_size"])
    for edge in plot["edges"]:
        (x0, y0), (x1, y1) = edge["p0"], edge["p1"]
        ax.plot([x0, x1], [y0, y1], color=config.SVG["edge_color"], lw=config.SVG["edge_width"])
        i, j = edge["type"][0], edge["type"][-1]
        ax.text((x0 + x1) / 2, (y0 + y1) / 2, f"[{i},{j}]", fontsize=config.SVG["label_font_size"], color="#444444")
    for vertex in plot["vertices"]:
        x, y = vertex["pos"]
        color = {"trivalent-black": "black", "trivalent-white": "white", "x-crossing": "#d62728"}.get(
            vertex["class"], "#ff7f0e"
        )
        ax.scatter([x], [y], s=config.SVG["vertex_size"], c=color, edgecolors="black", zorder=3)
    ax.set_xlim(xmin, xmax)
    ax.set_ylim(ymin, ymax)
    ax.set_title(f"t = {plot['time']:g}", fontsize=config.SVG["font_size"])
    _save(fig, path)


def render_graph(graph: Dict[str, Any], path: Path):
    """Draw a plabic graph from its JSON form using the stored vertex positions."""
    fig, ax = _figure()
    positions = {v["id"]: v.get("position") for v in graph["vertices"]}
    if any(p is None for p in positions.values()):
        # Without a drawing, fall back to a circular layout of the vertex ids
        import networkx as nx

        layout = nx.circular_layout(sorted(positions))
        positions = {v: tuple(layout[v]) for v in positions}
    for edge in graph["edges"]:
        u, v = edge["ends"]
        (x0, y0), (x1, y1) = positions[u], positions[v]
        ax.plot([x0, x1], [y0, y1], color=config.SVG["edge_color"], lw=config.SVG["edge_width"], zorder=1)
    for vertex in graph["vertices"]:
        x, y = positions[vertex["id"]]
        ax.scatter([x], [y], s=config.SVG["vertex_size"], c=VERTEX_COLORS[vertex["color"]], edgecolors="black", zorder=2)
        if vertex.get("label") is not None:
            ax.text(x, y, f" {vertex['label']}", fontsize=config.SVG["font_size"], va="bottom")
    ax.autoscale()
    _save(fig, path)
