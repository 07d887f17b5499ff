"""
From Le-diagrams to plabic graphs.

The pipe dream of a Le-diagram is turned into the generalized plabic
graph G_-(L): every + becomes a white/black pair joined by an edge, every
0 becomes an X-crossing, the straight pipe segments hanging off the
south-east border are erased and degree-2 vertices are spliced out. The
boundary vertices sit on the north-west border.

``predict_graph_t_neg`` extends the unbounded edges of G_-(L) and crosses
adjacent ones until the boundary order matches the slope order of the
unbounded line-solitons.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from core.errors import InputFormatError, NotIrreducible
from core.grassmann import GrassmannPoint, KappaParams
from core.plabic_graph import (
    GeneralizedPlabicGraph,
    VertexColor,
    is_label_isomorphic,
    plabic_from_soliton_graph,
    splice_degree_two,
)
from core.positroid import Derangement, LeDiagram, derangement_of, point_in_cell, trace_pipes
from core.soliton_engine import auto_negative_time, tropical_field

# Configure logging
logger = logging.getLogger(__name__)

CROSS = "cross"
ELBOW = "elbow"


@dataclass(frozen=True)
class PipeGrid:
    """Tiles of the pipe dream and where each pipe leaves the diagram."""
    grid: Tuple[Tuple[str, ...], ...]
    border_labels: Tuple[Tuple[int, ...], Tuple[int, ...]]
    pipe_destinations: Dict[int, Tuple[str, int]]

    def tile(self, r: int, c: int) -> str:
        return self.grid[r - 1][c - 1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "grid": [list(row) for row in self.grid],
            "east_labels": list(self.border_labels[0]),
            "south_labels": list(self.border_labels[1]),
            "destinations": {str(k): [side, index] for k, (side, index) in sorted(self.pipe_destinations.items())},
        }


def pipe_grid(diagram: LeDiagram) -> PipeGrid:
    """Elbows for +, crosses for 0, pipes traced from the south-east border."""
    grid = tuple(tuple(ELBOW if ch == "+" else CROSS for ch in row) for row in diagram.rows)
    return PipeGrid(grid=grid, border_labels=diagram.border_labels, pipe_destinations=trace_pipes(diagram))


class GraphBuilder:
    """Accumulates vertices and straight edges with coordinates."""

    def __init__(self):
        self.colors: Dict[int, Optional[VertexColor]] = {}
        self.positions: Dict[int, Tuple[float, float]] = {}
        self.edges: Dict[int, Tuple[int, int]] = {}
        self.keys: Dict[Any, int] = {}
        self._next_edge = 0

    def vertex(self, key: Any, position: Tuple[float, float], color: Optional[VertexColor] = None) -> int:
        if key not in self.keys:
            vertex = len(self.keys)
            self.keys[key] = vertex
            self.colors[vertex] = color
            self.positions[vertex] = position
        return self.keys[key]

    def edge(self, u: int, v: int) -> int:
        edge_id = self._next_edge
        self._next_edge += 1
        self.edges[edge_id] = (u, v)
        return edge_id

    def rotation(self) -> Dict[int, List[int]]:
        """Counterclockwise order from the straight-line drawing."""
        incident: Dict[int, List[int]] = {v: [] for v in self.colors}
        for edge_id, (u, v) in self.edges.items():
            incident[u].append(edge_id)
            incident[v].append(edge_id)

        def angle(vertex: int, edge_id: int) -> float:
            u, v = self.edges[edge_id]
            other = v if u == vertex else u
            (x0, y0), (x1, y1) = self.positions[vertex], self.positions[other]
            return math.atan2(y1 - y0, x1 - x0) % (2 * math.pi)

        return {v: sorted(es, key=lambda e: angle(v, e)) for v, es in incident.items()}


def build_g_minus(diagram: LeDiagram, rotate: bool = True) -> GeneralizedPlabicGraph:
    """
    Construct G_-(L).

    Box (r, c) occupies [c-1, c] x [-r, -r+1]. Side midpoints are ports. An
    elbow has a white vertex near its north-east corner (joined to the east
    and north ports) and a black vertex near its south-west corner (joined
    to the south and west ports). A cross is a crossing joined to all four.

    Args:
        diagram: An irreducible Le-diagram.
        rotate: Turn the drawing a quarter clockwise so the west boundary
            faces north.

    Returns:
        GeneralizedPlabicGraph: Boundary vertices on the north-west border,
        labelled by the pipe that ends there.

    Raises:
        NotIrreducible: If the diagram is reducible.
    """
    if not diagram.is_irreducible():
        raise NotIrreducible(f"Le-diagram {diagram.to_text('/')!r} is reducible")

    builder = GraphBuilder()

    def vport(r: int, c: int) -> int:
        # Port on the vertical line x = c in row r
        return builder.vertex(("x", r, c), (float(c), -r + 0.5))

    def hport(r: int, c: int) -> int:
        # Port on the horizontal line y = -r in column c
        return builder.vertex(("y", r, c), (c - 0.5, float(-r)))

    sides: Dict[Tuple[int, int], Dict[str, int]] = {}
    for r, c in diagram.boxes():
        east, west, north, south = vport(r, c), vport(r, c - 1), hport(r - 1, c), hport(r, c)
        if diagram.is_plus(r, c):
            a = builder.vertex(("a", r, c), (c - 0.25, -r + 0.75), VertexColor.WHITE)
            b = builder.vertex(("b", r, c), (c - 0.75, -r + 0.25), VertexColor.BLACK)
            sides[(r, c)] = {
                "E": builder.edge(east, a),
                "N": builder.edge(a, north),
                "S": builder.edge(south, b),
                "W": builder.edge(b, west),
            }
            builder.edge(a, b)
        else:
            x = builder.vertex(("X", r, c), (c - 0.5, -r + 0.5), VertexColor.CROSSING)
            sides[(r, c)] = {
                "E": builder.edge(east, x),
                "W": builder.edge(x, west),
                "N": builder.edge(north, x),
                "S": builder.edge(x, south),
            }

    # Erase pipe ends on the south-east border up to the first elbow
    for r in range(1, diagram.k + 1):
        c = diagram.shape[r - 1]
        while c >= 1:
            del builder.edges[sides[(r, c)]["E"]]
            if diagram.is_plus(r, c):
                break
            del builder.edges[sides[(r, c)]["W"]]
            c -= 1
    for c in range(1, diagram.n - diagram.k + 1):
        r = diagram.column_height(c)
        while r >= 1:
            del builder.edges[sides[(r, c)]["S"]]
            if diagram.is_plus(r, c):
                break
            del builder.edges[sides[(r, c)]["N"]]
            r -= 1

    rotation = builder.rotation()
    boundary_keys = [("y", 0, c) for c in range(diagram.n - diagram.k, 0, -1)]
    boundary_keys += [("x", r, 0) for r in range(1, diagram.k + 1)]
    boundary = [builder.keys[key] for key in boundary_keys]
    boundary_set = set(boundary)

    edges = dict(builder.edges)
    removable = [v for v in builder.colors if v not in boundary_set]
    splice_degree_two(edges, rotation, removable)
    alive = {v for ends in edges.values() for v in ends}

    labels = {}
    for label, (side, index) in trace_pipes(diagram).items():
        key = ("x", index, 0) if side == "W" else ("y", 0, index)
        labels[builder.keys[key]] = label

    colors: Dict[int, VertexColor] = {}
    positions: Dict[int, Tuple[float, float]] = {}
    for vertex in alive:
        color = VertexColor.BOUNDARY if vertex in boundary_set else builder.colors[vertex]
        if color is None:
            raise NotIrreducible(f"port {vertex} survived splicing; the diagram is not a valid Le-diagram")
        colors[vertex] = color
        x, y = builder.positions[vertex]
        positions[vertex] = (y, -x) if rotate else (x, y)

    g = GeneralizedPlabicGraph(
        colors,
        edges,
        {v: rotation[v] for v in alive},
        boundary,
        labels,
        positions,
    )
    logger.debug(f"built G_- for {diagram.to_text('/')!r}: {g!r}")
    return g


def target_boundary_sequence(derangement: Derangement, kappa: KappaParams) -> List[int]:
    """
    Counterclockwise boundary labels of the t << 0 soliton graph.

    Top rays [i, pi(i)] from right to left carry pi(i); bottom rays
    [pi(j), j] from left to right carry pi(j).
    """
    top = [i for i in range(1, derangement.n + 1) if derangement(i) > i]
    bottom = [j for j in range(1, derangement.n + 1) if derangement(j) < j]

    def slope(i: int) -> float:
        return kappa.value(i) + kappa.value(derangement(i))

    top.sort(key=slope)
    bottom.sort(key=slope)
    return [derangement(i) for i in top] + [derangement(j) for j in bottom]


def _inversions(sequence: List[int]) -> int:
    return sum(1 for a in range(len(sequence)) for b in range(a + 1, len(sequence)) if sequence[a] > sequence[b])


def predict_graph_t_neg(diagram: LeDiagram, kappa: KappaParams) -> GeneralizedPlabicGraph:
    """
    Predicted t << 0 soliton graph of the cell of ``diagram``.

    The unbounded edges of G_-(L) are extended and adjacent ones are
    crossed (one X-crossing per adjacent transposition) until the boundary
    labels appear in slope order. The cyclic alignment with the fewest
    inversions is used; for TP Schubert cells no crossing is needed.

    Raises:
        InputFormatError: If ``kappa`` does not match the size of the diagram.
    """
    if kappa.n != diagram.n:
        raise InputFormatError(f"kappa has {kappa.n} values, diagram needs {diagram.n}")
    g = build_g_minus(diagram)
    target = target_boundary_sequence(derangement_of(diagram), kappa)
    current = g.boundary_label_sequence()

    n = len(target)
    best_offset, best_count = 0, None
    for offset in range(n):
        rotated = target[offset:] + target[:offset]
        rank = {label: index for index, label in enumerate(rotated)}
        count = _inversions([rank[label] for label in current])
        if best_count is None or count < best_count:
            best_offset, best_count = offset, count
    rotated = target[best_offset:] + target[:best_offset]
    rank = {label: index for index, label in enumerate(rotated)}
    if best_count == 0:
        return g

    colors = {v: g.color(v) for v in g.graph.nodes}
    edges = dict(g.edges)
    rotation = {v: list(r) for v, r in g.rotation.items()}
    positions = {v: g.position(v) for v in g.graph.nodes if g.position(v) is not None}
    slots = list(g.boundary_order)
    labels = {v: g.label_of(v) for v in slots}
    next_vertex = max(colors) + 1
    next_edge = max(edges) + 1

    def attach(slot: int) -> Tuple[int, int]:
        (edge_id,) = rotation[slot]
        return edge_id, _far(edges[edge_id], slot)

    swaps = 0
    ordered = False
    while not ordered:
        ordered = True
        for p in range(n - 1):
            bp, bq = slots[p], slots[p + 1]
            if rank[labels[bp]] <= rank[labels[bq]]:
                continue
            ordered = False
            eu, u = attach(bp)
            ew, w = attach(bq)
            x = next_vertex
            next_vertex += 1
            colors[x] = VertexColor.CROSSING
            new = {}
            for name, (a, b) in (("bp", (x, bp)), ("bq", (x, bq)), ("w", (x, w)), ("u", (x, u))):
                edges[next_edge] = (a, b)
                new[name] = next_edge
                next_edge += 1
            del edges[eu], edges[ew]
            rotation[u] = [new["u"] if e == eu else e for e in rotation[u]]
            rotation[w] = [new["w"] if e == ew else e for e in rotation[w]]
            rotation[bp] = [new["bp"]]
            rotation[bq] = [new["bq"]]
            rotation[x] = [new["bp"], new["bq"], new["w"], new["u"]]
            labels[bp], labels[bq] = labels[bq], labels[bp]
            if bp in positions and bq in positions and u in positions and w in positions:
                positions[x] = tuple(
                    float(np.mean([positions[v][axis] for v in (bp, bq, u, w)])) for axis in range(2)
                )
            swaps += 1
    logger.debug(f"inserted {swaps} X-crossings for {diagram.to_text('/')!r}")
    return GeneralizedPlabicGraph(colors, edges, rotation, slots, labels, positions)


def _far(ends: Tuple[int, int], vertex: int) -> int:
    return ends[1] if ends[0] == vertex else ends[0]


@dataclass
class PredictionReport:
    """Comparison of the predicted and the computed t << 0 soliton graph."""
    matches: bool
    time: float
    predicted_boundary: List[int]
    observed_boundary: List[int]
    predicted_crossings: int
    observed_crossings: int
    mismatches: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "matches": self.matches,
            "time": self.time,
            "predicted_boundary": self.predicted_boundary,
            "observed_boundary": self.observed_boundary,
            "predicted_crossings": self.predicted_crossings,
            "observed_crossings": self.observed_crossings,
            "mismatches": self.mismatches,
        }


def prediction_report(
    diagram: LeDiagram,
    kappa: KappaParams,
    point: Optional[GrassmannPoint] = None,
    seed: int = 0,
) -> PredictionReport:
    """
    Compare ``predict_graph_t_neg`` with the numerically computed graph.

    Args:
        diagram: An irreducible Le-diagram.
        kappa: Soliton parameters for the diagram's n.
        point: A point of the cell; a random one is drawn when omitted.
        seed: Seed for the random point.

    Returns:
        PredictionReport: Whether the graphs are label isomorphic, with the
        differences that were found.
    """
    if point is None:
        point = point_in_cell(diagram, np.random.default_rng(seed))
    predicted = predict_graph_t_neg(diagram, kappa)
    time, soliton = auto_negative_time(tropical_field(point, kappa))
    observed = plabic_from_soliton_graph(soliton)

    mismatches = []
    if predicted.boundary_label_sequence() != observed.boundary_label_sequence():
        seq = observed.boundary_label_sequence()
        pred = predicted.boundary_label_sequence()
        if not any(seq[i:] + seq[:i] == pred for i in range(len(seq))):
            mismatches.append("boundary order differs")
    if len(predicted.crossings()) != len(observed.crossings()):
        mismatches.append("number of X-crossings differs")
    matches = is_label_isomorphic(predicted, observed)
    if not matches and not mismatches:
        mismatches.append("interior structure differs")
    if not matches:
        logger.warning(f"prediction for {diagram.to_text('/')!r} differs from t={time}: {mismatches}")
    return PredictionReport(
        matches=matches,
        time=time,
        predicted_boundary=predicted.boundary_label_sequence(),
        observed_boundary=observed.boundary_label_sequence(),
        predicted_crossings=len(predicted.crossings()),
        observed_crossings=len(observed.crossings()),
        mismatches=mismatches,
    )
