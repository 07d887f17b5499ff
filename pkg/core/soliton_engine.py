"""
Soliton engine.

Evaluates the tau function and the KP solution of a Grassmannian point,
builds the tropical approximation f_A = max_J l_J, cuts the plane into the
cells where one exponential dominates (the contour plot), turns the
contour plot into a soliton graph and checks the plot against the
combinatorics of the positroid cell.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

import config
from core.errors import (
    EmptyMatroid,
    InputFormatError,
    MalformedPlot,
    NecklaceViolation,
    NonGenericInput,
    NotANecklace,
    NotASchubertCell,
    NotGeneric,
    NotTotallyNonnegative,
    TimeSelectionError,
)
from core.grassmann import GrassmannPoint, KappaParams, Positivity, Subset, classify, validate_kappa
from core.plabic_graph import VertexColor, is_label_isomorphic, plabic_from_soliton_graph
from core.positroid import (
    Derangement,
    GrassmannNecklace,
    derangement_from_necklace,
    is_tp_schubert,
)

# Configure logging
logger = logging.getLogger(__name__)

Point2 = Tuple[float, float]
BBox = Tuple[float, float, float, float]  # xmin, xmax, ymin, ymax


def _kappa_arrays(kappa: KappaParams, subset: Sequence[int]) -> Tuple[float, float, float, float]:
    """(ln K_I, sum kappa, sum kappa^2, sum kappa^3) for a subset."""
    values = [kappa.value(i) for i in subset]
    log_k = sum(math.log(values[m] - values[l]) for l, m in combinations(range(len(values)), 2))
    return log_k, sum(values), sum(v * v for v in values), sum(v ** 3 for v in values)


def _check_sizes(point: GrassmannPoint, kappa: KappaParams):
    if kappa.n != point.n:
        raise InputFormatError(f"kappa has {kappa.n} values but the point lives in Gr({point.k},{point.n})")


def _exponents(point: GrassmannPoint, kappa: KappaParams, x: float, y: float, t: float):
    subsets = point.subsets()
    coefficients = np.array([_kappa_arrays(kappa, s) for s in subsets])
    exponents = coefficients[:, 0] + coefficients[:, 1] * x + coefficients[:, 2] * y + coefficients[:, 3] * t
    weights = np.array([point.pluecker[s] for s in subsets])
    return exponents, weights, coefficients[:, 1]


def log_tau(point: GrassmannPoint, kappa: KappaParams, x: float, y: float, t: float) -> Tuple[float, float]:
    """
    ln|tau| and the sign of tau at (x, y, t).

    tau = sum_I Delta_I K_I exp(sum_{i in I} kappa_i x + kappa_i^2 y + kappa_i^3 t),
    evaluated with log-sum-exp so large arguments do not overflow.
    """
    _check_sizes(point, kappa)
    exponents, weights, _ = _exponents(point, kappa, x, y, t)
    value, sign = logsumexp(exponents, b=weights, return_sign=True)
    return float(value), float(sign)


def tau(point: GrassmannPoint, kappa: KappaParams, x: float, y: float, t: float) -> float:
    """The tau function (may overflow to inf for huge arguments; use ``log_tau`` then)."""
    value, sign = log_tau(point, kappa, x, y, t)
    return sign * math.exp(value) if value < 700 else sign * math.inf


def u(point: GrassmannPoint, kappa: KappaParams, x: float, y: float, t: float) -> float:
    """
    KP solution u = 2 (ln tau)_xx.

    Each x-derivative of a term multiplies it by sum_{i in I} kappa_i, so
    u is twice the weighted variance of those sums.
    """
    _check_sizes(point, kappa)
    exponents, weights, slopes = _exponents(point, kappa, x, y, t)
    log_total, sign = logsumexp(exponents, b=weights, return_sign=True)
    w = weights * np.exp(exponents - log_total) * sign
    mean = float(np.dot(w, slopes))
    second = float(np.dot(w, slopes * slopes))
    return 2.0 * (second - mean * mean)


@dataclass(frozen=True)
class TropicalTerm:
    """l_J = ln(Delta_J K_J) + (sum kappa) x + (sum kappa^2) y + (sum kappa^3) t."""
    basis: Subset
    constant: float
    x: float
    y: float
    t: float

    def at(self, x: float, y: float, t: float) -> float:
        return self.constant + self.x * x + self.y * y + self.t * t


@dataclass(frozen=True)
class TropicalField:
    """The max-plus function f_A as a list of affine terms."""
    kappa: KappaParams
    k: int
    n: int
    terms: Tuple[TropicalTerm, ...]

    @property
    def bases(self) -> List[Subset]:
        return [term.basis for term in self.terms]

    def coefficients(self, t: float) -> np.ndarray:
        """Rows (constant at time t, x coefficient, y coefficient)."""
        return np.array([[term.constant + term.t * t, term.x, term.y] for term in self.terms])

    def value(self, x: float, y: float, t: float) -> float:
        return max(term.at(x, y, t) for term in self.terms)

    def dominant(self, x: float, y: float, t: float) -> Subset:
        return max(self.terms, key=lambda term: term.at(x, y, t)).basis

    def term(self, basis: Subset) -> TropicalTerm:
        for term in self.terms:
            if term.basis == basis:
                return term
        raise KeyError(basis)

    def left_basis(self) -> Subset:
        """Dominant basis for x << 0 (smallest sum of kappas)."""
        return min(self.terms, key=lambda term: term.x).basis


def tropical_field(point: GrassmannPoint, kappa: KappaParams, tol: Optional[float] = None) -> TropicalField:
    """
    Tropical approximation of ln tau.

    Raises:
        EmptyMatroid: If no Plücker coordinate is nonzero.
        NotTotallyNonnegative: If the point has minors of both signs.
        NotGeneric: If kappa is not generic for the point's k.
    """
    _check_sizes(point, kappa)
    validate_kappa(kappa.kappas, point.k)
    positivity, matroid = classify(point, tol)
    if positivity == Positivity.NEITHER:
        raise NotTotallyNonnegative("point has Plücker coordinates of both signs")
    bases = matroid.sorted_bases()
    if not bases:
        raise EmptyMatroid("no nonzero Plücker coordinate")
    sign = 1.0 if point.pluecker[bases[0]] > 0 else -1.0

    terms = []
    for basis in bases:
        log_k, sx, sy, st = _kappa_arrays(kappa, basis)
        terms.append(TropicalTerm(basis, math.log(sign * point.pluecker[basis]) + log_k, sx, sy, st))
    return TropicalField(kappa=kappa, k=point.k, n=point.n, terms=tuple(terms))


class VertexKind(str, Enum):
    TRIVALENT_BLACK = "trivalent-black"
    TRIVALENT_WHITE = "trivalent-white"
    X_CROSSING = "x-crossing"
    DEGENERATE = "degenerate"


@dataclass
class ContourRegion:
    basis: Subset
    polygon: List[Point2]
    unbounded: bool = False


@dataclass
class ContourEdge:
    """
    A segment of the contour. ``v0``/``v1`` are vertex indices; ``None``
    marks an end on the bounding box (an unbounded soliton).
    """
    bases: Tuple[Subset, Subset]
    type: Tuple[int, ...]
    p0: Point2
    p1: Point2
    v0: Optional[int] = None
    v1: Optional[int] = None

    @property
    def is_ray(self) -> bool:
        return self.v0 is None or self.v1 is None

    @property
    def regular(self) -> bool:
        return len(self.type) == 2


@dataclass
class ContourVertex:
    position: Point2
    edges: List[int] = field(default_factory=list)
    kind: VertexKind = VertexKind.DEGENERATE


@dataclass
class ContourPlot:
    """Cell decomposition of the bounding box by dominant exponential."""
    field: TropicalField
    time: float
    bbox: BBox
    regions: List[ContourRegion]
    edges: List[ContourEdge]
    vertices: List[ContourVertex]
    generic: bool = True
    issues: List[str] = field(default_factory=list)

    @property
    def kappa(self) -> KappaParams:
        return self.field.kappa

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.field.k,
            "n": self.field.n,
            "kappa": list(self.kappa.kappas),
            "time": self.time,
            "bbox": list(self.bbox),
            "regions": [
                {"basis": list(r.basis), "polygon": [list(p) for p in r.polygon], "unbounded": r.unbounded}
                for r in self.regions
            ],
            "edges": [
                {
                    "type": list(e.type),
                    "bases": [list(b) for b in e.bases],
                    "p0": list(e.p0),
                    "p1": list(e.p1),
                    "ray": e.is_ray,
                    "v0": e.v0,
                    "v1": e.v1,
                }
                for e in self.edges
            ],
            "vertices": [{"pos": list(v.position), "class": v.kind.value} for v in self.vertices],
            "generic": self.generic,
            "issues": list(self.issues),
        }


def clip_halfplane(polygon: np.ndarray, a: float, b: float, c: float, eps: float = 0.0) -> np.ndarray:
    """
    Intersect a convex polygon with {a + b x + c y >= 0}.

    Vertices within ``eps`` of the boundary line count as inside.
    """
    if polygon.size == 0:
        return polygon
    dist = a + polygon @ np.array([b, c])
    dist[np.abs(dist) <= eps] = 0.0
    result = []
    count = polygon.shape[0]
    for ck in range(count):
        cn = (ck + 1) % count
        if dist[ck] * dist[cn] < 0:
            w = dist[cn] / (dist[cn] - dist[ck])
            result.append(w * polygon[ck] + (1 - w) * polygon[cn])
        if dist[cn] >= 0:
            result.append(polygon[cn])
    return np.array(result).reshape(-1, 2)


def _dedupe(polygon: np.ndarray, eps: float) -> np.ndarray:
    points: List[np.ndarray] = []
    for p in polygon:
        if not points or np.linalg.norm(p - points[-1]) > eps:
            points.append(p)
    while len(points) > 1 and np.linalg.norm(points[0] - points[-1]) <= eps:
        points.pop()
    return np.array(points).reshape(-1, 2)


def _area(polygon: np.ndarray) -> float:
    if polygon.shape[0] < 3:
        return 0.0
    x, y = polygon[:, 0], polygon[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _cells(coefficients: np.ndarray, box: BBox, scale: float) -> Dict[int, np.ndarray]:
    """Cell of every term inside the box (empty cells dropped)."""
    xmin, xmax, ymin, ymax = box
    square = np.array([[xmin, ymin], [xmax, ymin], [xmax, ymax], [xmin, ymax]], dtype=float)
    eps_line = 1e-12 * scale
    eps_point = 1e-10 * max(1.0, xmax - xmin, ymax - ymin)
    cells = {}
    for j, (cj, pj, qj) in enumerate(coefficients):
        polygon = square
        for other, (co, po, qo) in enumerate(coefficients):
            if other == j:
                continue
            polygon = clip_halfplane(polygon, cj - co, pj - po, qj - qo, eps_line)
            if polygon.shape[0] < 3:
                break
        polygon = _dedupe(polygon, eps_point)
        if polygon.shape[0] >= 3 and _area(polygon) > eps_point ** 2:
            cells[j] = polygon
    return cells


def _on_box(point: np.ndarray, box: BBox, eps: float) -> bool:
    xmin, xmax, ymin, ymax = box
    return (
        abs(point[0] - xmin) <= eps or abs(point[0] - xmax) <= eps
        or abs(point[1] - ymin) <= eps or abs(point[1] - ymax) <= eps
    )


def auto_bbox(field: TropicalField, t: float) -> BBox:
    """
    Box around every contour vertex, grown by ``config.BBOX['expand']`` and
    a fixed margin. Vertices come from a first pass over a huge box.
    """
    coefficients = field.coefficients(t)
    size = 1.0 + float(np.max(np.abs(coefficients))) if len(coefficients) else 1.0
    radius = config.BBOX["provisional_scale"] * size
    box = (-radius, radius, -radius, radius)
    cells = _cells(coefficients, box, radius * size)

    corners = [p for polygon in cells.values() for p in polygon if not _on_box(p, box, 1e-9 * radius)]
    if not corners:
        # No vertex: use the foot of the perpendicular from the origin on every contour line
        for j, polygon in cells.items():
            for other in cells:
                if other <= j:
                    continue
                c, p, q = coefficients[j] - coefficients[other]
                norm = p * p + q * q
                if norm > 0:
                    corners.append(np.array([-c * p / norm, -c * q / norm]))
    if not corners:
        corners = [np.zeros(2)]
    points = np.array(corners)
    xmin, ymin = points.min(axis=0)
    xmax, ymax = points.max(axis=0)
    grow_x = config.BBOX["expand"] * (xmax - xmin) + config.BBOX["margin"]
    grow_y = config.BBOX["expand"] * (ymax - ymin) + config.BBOX["margin"]
    return float(xmin - grow_x), float(xmax + grow_x), float(ymin - grow_y), float(ymax + grow_y)


def contour_plot(field: TropicalField, t0: float, bbox: Optional[BBox] = None) -> ContourPlot:
    """
    Contour plot of f_A at time ``t0``.

    Args:
        field: The tropical field.
        t0: Time.
        bbox: (xmin, xmax, ymin, ymax); chosen automatically when omitted.

    Returns:
        ContourPlot: Regions, edges and classified vertices. Non-generic
        vertices and irregular edges are listed in ``issues``.
    """
    bbox = bbox if bbox is not None else auto_bbox(field, t0)
    coefficients = field.coefficients(t0)
    span = max(bbox[1] - bbox[0], bbox[3] - bbox[2], 1.0)
    scale = 1.0 + float(np.max(np.abs(coefficients))) * span if len(coefficients) else 1.0
    cells = _cells(coefficients, bbox, scale)
    eps = 1e-9 * span
    bases = field.bases

    regions = []
    sides: Dict[FrozenSet[int], List[np.ndarray]] = {}
    for j, polygon in sorted(cells.items()):
        unbounded = False
        for ck in range(polygon.shape[0]):
            p, q = polygon[ck], polygon[(ck + 1) % polygon.shape[0]]
            if np.linalg.norm(q - p) <= eps:
                continue
            mid = 0.5 * (p + q)
            if _on_box(mid, bbox, eps):
                unbounded = True
                continue
            values = coefficients[:, 0] + coefficients[:, 1] * mid[0] + coefficients[:, 2] * mid[1]
            values[j] = -np.inf
            neighbour = int(np.argmax(values))
            sides.setdefault(frozenset((j, neighbour)), []).extend([p, q])
        regions.append(ContourRegion(bases[j], [(float(x), float(y)) for x, y in polygon], unbounded))

    # One segment per adjacent pair: extreme points along the common line
    raw_edges = []
    for key, points in sorted(sides.items(), key=lambda item: sorted(item[0])):
        j, other = sorted(key)
        points = np.array(points)
        direction = np.array([-(coefficients[j][2] - coefficients[other][2]), coefficients[j][1] - coefficients[other][1]])
        direction = direction / np.linalg.norm(direction)
        along = points @ direction
        p0, p1 = points[int(np.argmin(along))], points[int(np.argmax(along))]
        if np.linalg.norm(p1 - p0) <= eps:
            continue
        raw_edges.append((j, other, p0, p1))

    # Cluster interior endpoints into vertices
    vertex_points: List[np.ndarray] = []
    vertex_members: List[List[Tuple[int, int]]] = []

    def vertex_for(point: np.ndarray) -> Optional[int]:
        if _on_box(point, bbox, eps):
            return None
        for index, existing in enumerate(vertex_points):
            if np.linalg.norm(existing - point) <= 1e-7 * span:
                return index
        vertex_points.append(point)
        vertex_members.append([])
        return len(vertex_points) - 1

    edges: List[ContourEdge] = []
    for j, other, p0, p1 in raw_edges:
        a, b = set(bases[j]), set(bases[other])
        edge_type = tuple(sorted(a ^ b))
        edge = ContourEdge(
            bases=(bases[j], bases[other]),
            type=edge_type,
            p0=(float(p0[0]), float(p0[1])),
            p1=(float(p1[0]), float(p1[1])),
            v0=vertex_for(p0),
            v1=vertex_for(p1),
        )
        index = len(edges)
        edges.append(edge)
        for v in (edge.v0, edge.v1):
            if v is not None:
                vertex_members[v].append((index, j))
                vertex_members[v].append((index, other))

    vertices = []
    for index, point in enumerate(vertex_points):
        involved = sorted({term for _, term in vertex_members[index]})
        refined = _refine_vertex(coefficients, involved, point)
        vertex = ContourVertex(position=(float(refined[0]), float(refined[1])))
        vertex.edges = sorted({e for e, _ in vertex_members[index]})
        vertices.append(vertex)
        for e in vertex.edges:
            if edges[e].v0 == index:
                edges[e].p0 = vertex.position
            if edges[e].v1 == index:
                edges[e].p1 = vertex.position

    plot = ContourPlot(field=field, time=t0, bbox=bbox, regions=regions, edges=edges, vertices=vertices)
    _classify_vertices(plot)
    if not plot.generic:
        logger.warning(f"contour plot at t={t0} is not generic: {plot.issues}")
    logger.debug(f"contour plot at t={t0}: {len(regions)} regions, {len(edges)} edges, {len(vertices)} vertices")
    return plot


def _refine_vertex(coefficients: np.ndarray, involved: List[int], guess: np.ndarray) -> np.ndarray:
    """Least-squares point where all involved terms are equal."""
    if len(involved) < 3:
        return guess
    base = coefficients[involved[0]]
    rows = np.array([[coefficients[j][1] - base[1], coefficients[j][2] - base[2]] for j in involved[1:]])
    rhs = np.array([base[0] - coefficients[j][0] for j in involved[1:]])
    solution, _, rank, _ = np.linalg.lstsq(rows, rhs, rcond=None)
    return solution if rank == 2 else guess


def outward_direction(plot: ContourPlot, edge_index: int, vertex_index: Optional[int] = None, at_p0: bool = True) -> np.ndarray:
    """Unit direction of an edge pointing away from one of its ends."""
    edge = plot.edges[edge_index]
    p0, p1 = np.array(edge.p0), np.array(edge.p1)
    if vertex_index is not None:
        at_p0 = edge.v0 == vertex_index
    vector = p1 - p0 if at_p0 else p0 - p1
    return vector / np.linalg.norm(vector)


def _classify_vertices(plot: ContourPlot):
    issues = []
    for index, edge in enumerate(plot.edges):
        if not edge.regular:
            issues.append(f"edge {index} between {list(edge.bases[0])} and {list(edge.bases[1])} is irregular")

    for index, vertex in enumerate(plot.vertices):
        directions = [outward_direction(plot, e, index) for e in vertex.edges]
        types = [plot.edges[e].type for e in vertex.edges]
        if len(directions) == 3:
            down = sum(1 for d in directions if d[1] < 0)
            up = sum(1 for d in directions if d[1] > 0)
            vertex.kind = VertexKind.TRIVALENT_BLACK if down == 1 else VertexKind.TRIVALENT_WHITE
            labels = sorted({i for pair in types for i in pair})
            if len(labels) != 3 or sorted(types) != sorted(
                [(labels[0], labels[1]), (labels[1], labels[2]), (labels[0], labels[2])]
            ) or (down != 1 and up != 1):
                vertex.kind = VertexKind.DEGENERATE
        elif len(directions) == 4 and _is_crossing(directions, types):
            vertex.kind = VertexKind.X_CROSSING
        else:
            vertex.kind = VertexKind.DEGENERATE
        if vertex.kind == VertexKind.DEGENERATE:
            issues.append(f"vertex {index} at {vertex.position} has degree {len(directions)} and is degenerate")
    plot.issues = issues
    plot.generic = not issues


def _is_crossing(directions: List[np.ndarray], types: List[Tuple[int, ...]]) -> bool:
    used = set()
    for a in range(4):
        if a in used:
            continue
        partner = None
        for b in range(4):
            if b != a and b not in used and np.dot(directions[a], directions[b]) < -1 + 1e-7 and types[a] == types[b]:
                partner = b
                break
        if partner is None:
            return False
        used |= {a, partner}
    return True


def _line_data(plot: ContourPlot, edge: ContourEdge) -> Tuple[int, int, float]:
    """(i, j, right-hand side) of x + (k_i+k_j) y + (k_i^2+k_i k_j+k_j^2) t = rhs."""
    first, second = plot.field.term(edge.bases[0]), plot.field.term(edge.bases[1])
    (i,) = set(edge.bases[0]) - set(edge.bases[1])
    (j,) = set(edge.bases[1]) - set(edge.bases[0])
    ki, kj = plot.kappa.value(i), plot.kappa.value(j)
    return i, j, (first.constant - second.constant) / (kj - ki)


def line_residual(plot: ContourPlot, edge_index: int) -> float:
    """Largest distance of the edge's ends from its line-soliton line."""
    edge = plot.edges[edge_index]
    i, j, rhs = _line_data(plot, edge)
    ki, kj = plot.kappa.value(i), plot.kappa.value(j)
    s, w = ki + kj, ki * ki + ki * kj + kj * kj
    norm = math.hypot(1.0, s)
    return max(abs(x + s * y + w * plot.time - rhs) / norm for x, y in (edge.p0, edge.p1))


def slope_residual(plot: ContourPlot, edge_index: int) -> float:
    """Sine of the angle between the edge and the direction (-(k_i+k_j), 1)."""
    edge = plot.edges[edge_index]
    i, j = edge.type
    s = plot.kappa.value(i) + plot.kappa.value(j)
    d = outward_direction(plot, edge_index)
    expected = np.array([-s, 1.0]) / math.hypot(s, 1.0)
    return abs(float(d[0] * expected[1] - d[1] * expected[0]))


def balancing_residual(plot: ContourPlot, vertex_index: int) -> float:
    """Norm of sum over incident edges of (k_j - k_i) times the outward direction scaled to |dy| = 1."""
    total = np.zeros(2)
    for e in plot.vertices[vertex_index].edges:
        i, j = plot.edges[e].type
        d = outward_direction(plot, e, vertex_index)
        total += (plot.kappa.value(j) - plot.kappa.value(i)) * d / abs(d[1])
    return float(np.linalg.norm(total))


def unbounded_regions(plot: ContourPlot) -> List[Subset]:
    """Unbounded region labels counterclockwise, starting from the x << 0 region."""
    xmin, xmax, ymin, ymax = plot.bbox
    center = np.array([(xmin + xmax) / 2, (ymin + ymax) / 2])
    span = max(xmax - xmin, ymax - ymin)
    start_basis = plot.field.left_basis()

    touching = []
    for region in plot.regions:
        polygon = np.array(region.polygon)
        for ck in range(polygon.shape[0]):
            p, q = polygon[ck], polygon[(ck + 1) % polygon.shape[0]]
            mid = 0.5 * (p + q)
            if np.linalg.norm(q - p) > 1e-9 * span and _on_box(mid, plot.bbox, 1e-9 * span):
                angle = math.atan2(mid[1] - center[1], mid[0] - center[0]) % (2 * math.pi)
                touching.append((angle, region.basis))
    touching.sort()
    sequence = []
    for _, basis in touching:
        if not sequence or sequence[-1] != basis:
            sequence.append(basis)
    while len(sequence) > 1 and sequence[0] == sequence[-1]:
        sequence.pop()
    if start_basis in sequence:
        offset = sequence.index(start_basis)
        sequence = sequence[offset:] + sequence[:offset]
    return sequence


@dataclass
class SolitonGraph:
    """
    Soliton graph of a generic contour plot.

    Vertex ids below ``len(plot.vertices)`` are contour vertices; larger ids
    are boundary vertices at the ends of the unbounded solitons.
    """
    plot: ContourPlot
    colors: Dict[int, VertexColor]
    edges: Dict[int, Tuple[int, int]]
    rotation: Dict[int, List[int]]
    positions: Dict[int, Point2]
    boundary_order: List[int]
    ray_types: Dict[int, Tuple[int, int]]
    ray_sides: Dict[int, str]
    edge_types: Dict[int, Tuple[int, int]]
    region_labels: List[Subset]

    @property
    def time(self) -> float:
        return self.plot.time

    def top_rays(self) -> List[Tuple[int, int]]:
        return [self.ray_types[v] for v in self.boundary_order if self.ray_sides[v] == "top"]

    def bottom_rays(self) -> List[Tuple[int, int]]:
        return [self.ray_types[v] for v in self.boundary_order if self.ray_sides[v] == "bottom"]


def soliton_graph(plot: ContourPlot) -> SolitonGraph:
    """
    Colour trivalent vertices (black iff one edge goes down), keep
    X-crossings, and close every unbounded soliton with a boundary vertex.

    Boundary vertices are ordered counterclockwise by the angle of their
    soliton at infinity.

    Raises:
        NonGenericInput: If the plot has degenerate vertices or irregular edges.
    """
    if not plot.generic:
        raise NonGenericInput(f"contour plot at t={plot.time} is not generic", {"issues": plot.issues})

    colors: Dict[int, VertexColor] = {}
    positions: Dict[int, Point2] = {}
    for index, vertex in enumerate(plot.vertices):
        colors[index] = {
            VertexKind.TRIVALENT_BLACK: VertexColor.BLACK,
            VertexKind.TRIVALENT_WHITE: VertexColor.WHITE,
            VertexKind.X_CROSSING: VertexColor.CROSSING,
        }[vertex.kind]
        positions[index] = vertex.position

    edges: Dict[int, Tuple[int, int]] = {}
    edge_types: Dict[int, Tuple[int, int]] = {}
    outgoing: Dict[int, List[Tuple[float, int]]] = {v: [] for v in colors}
    ray_types: Dict[int, Tuple[int, int]] = {}
    ray_sides: Dict[int, str] = {}
    ray_keys: Dict[int, Tuple[float, float]] = {}
    next_vertex = len(plot.vertices)
    xmin, xmax, ymin, ymax = plot.bbox
    center = np.array([(xmin + xmax) / 2, (ymin + ymax) / 2])

    def angle_of(vector: np.ndarray) -> float:
        return math.atan2(vector[1], vector[0]) % (2 * math.pi)

    for index, edge in enumerate(plot.edges):
        ends = []
        for at_p0, v in ((True, edge.v0), (False, edge.v1)):
            if v is not None:
                ends.append(v)
                continue
            # Boundary vertex at this end of the soliton
            b = next_vertex
            next_vertex += 1
            point = np.array(edge.p0 if at_p0 else edge.p1)
            inward = outward_direction(plot, index, at_p0=at_p0)
            direction = -inward
            colors[b] = VertexColor.BOUNDARY
            positions[b] = (float(point[0]), float(point[1]))
            ray_types[b] = edge.type
            ray_sides[b] = "top" if direction[1] > 0 else "bottom"
            ray_keys[b] = (round(angle_of(direction), 9), angle_of(point - center))
            outgoing[b] = []
            ends.append(b)
        edges[index] = (ends[0], ends[1])
        edge_types[index] = edge.type
        d0 = outward_direction(plot, index, at_p0=True)
        outgoing[ends[0]].append((angle_of(d0), index))
        outgoing[ends[1]].append((angle_of(-d0), index))

    rotation = {v: [e for _, e in sorted(items)] for v, items in outgoing.items()}
    boundary_order = sorted(ray_keys, key=lambda b: ray_keys[b])
    return SolitonGraph(
        plot=plot,
        colors=colors,
        edges=edges,
        rotation=rotation,
        positions=positions,
        boundary_order=boundary_order,
        ray_types=ray_types,
        ray_sides=ray_sides,
        edge_types=edge_types,
        region_labels=[region.basis for region in plot.regions],
    )


@dataclass(frozen=True)
class Asymptotics:
    """Unbounded solitons left to right and unbounded regions counterclockwise."""
    top: Tuple[Tuple[int, int], ...]
    bottom: Tuple[Tuple[int, int], ...]
    regions: Tuple[Subset, ...]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "top": [list(p) for p in self.top],
            "bottom": [list(p) for p in self.bottom],
            "regions": [list(r) for r in self.regions],
        }


def predict_asymptotics(derangement: Derangement, kappa: KappaParams) -> Asymptotics:
    """
    Unbounded line-solitons read off from the derangement.

    For y >> 0 there is [i, pi(i)] for every excedance i, ordered left to
    right by decreasing kappa_i + kappa_pi(i); for y << 0 there is
    [pi(j), j] for every other j, ordered by increasing sum. Region labels
    start from the excedance set at x << 0 and change by one swap per
    soliton crossed, counterclockwise.

    Raises:
        NotGeneric: If two solitons on the same side have equal slopes.
    """
    if kappa.n != derangement.n:
        raise InputFormatError(f"kappa has {kappa.n} values, permutation has {derangement.n}")

    def slope(pair: Tuple[int, int]) -> float:
        return kappa.value(pair[0]) + kappa.value(pair[1])

    top = [(i, derangement(i)) for i in range(1, derangement.n + 1) if derangement(i) > i]
    bottom = [(derangement(j), j) for j in range(1, derangement.n + 1) if derangement(j) < j]
    for side in (top, bottom):
        slopes = sorted(slope(p) for p in side)
        for a, b in zip(slopes, slopes[1:]):
            if b - a <= config.GEOMETRY_TOL * max(1.0, abs(a)):
                raise NotGeneric(f"two unbounded solitons share the slope {a}")
    top.sort(key=slope, reverse=True)
    bottom.sort(key=slope)

    region = set(derangement.excedance_positions)
    regions = [tuple(sorted(region))]
    for i, j in list(bottom) + list(reversed(top)):
        region = (region - {i}) | {j} if i in region else (region - {j}) | {i}
        regions.append(tuple(sorted(region)))
    return Asymptotics(top=tuple(top), bottom=tuple(bottom), regions=tuple(regions[:-1]))


def read_derangement(plot: ContourPlot) -> Derangement:
    """
    Derangement from the unbounded solitons: [i, j] at y >> 0 gives
    pi(i) = j, [i, j] at y << 0 gives pi(j) = i.

    Raises:
        MalformedPlot: If the counts are not k and n-k or the pairs do not
            form a permutation.
    """
    graph = soliton_graph(plot) if plot.generic else None
    if graph is None:
        raise MalformedPlot("cannot read solitons from a non-generic plot", {"issues": plot.issues})
    top, bottom = graph.top_rays(), graph.bottom_rays()
    k, n = plot.field.k, plot.field.n
    if len(top) != k or len(bottom) != n - k:
        raise MalformedPlot(
            f"expected {k} solitons above and {n - k} below, found {len(top)} and {len(bottom)}",
            {"top": len(top), "bottom": len(bottom)},
        )
    pi = [0] * n
    for i, j in top:
        pi[i - 1] = j
    for i, j in bottom:
        pi[j - 1] = i
    try:
        return Derangement(tuple(pi))
    except InputFormatError as e:
        raise MalformedPlot(f"unbounded solitons do not define a derangement: {pi}") from e


def necklace_check(plot: ContourPlot) -> GrassmannNecklace:
    """
    Read the unbounded region labels counterclockwise from x << 0 and check
    that they form the necklace of the plot's derangement.

    Raises:
        NotASchubertCell: If the derangement is not of a TP Schubert cell.
        NecklaceViolation: If the labels are not that necklace.
    """
    derangement = read_derangement(plot)
    if not is_tp_schubert(derangement):
        raise NotASchubertCell(f"{list(derangement.pi)} is not a TP Schubert cell")
    regions = unbounded_regions(plot)
    if len(regions) != derangement.n:
        raise NecklaceViolation(
            f"found {len(regions)} unbounded regions, expected {derangement.n}",
            {"regions": [list(r) for r in regions]},
        )
    try:
        necklace = GrassmannNecklace(tuple(regions))
        found = derangement_from_necklace(necklace)
    except (NotANecklace, ValueError) as e:
        raise NecklaceViolation(f"unbounded regions are not a necklace: {e}") from e
    if found != derangement:
        raise NecklaceViolation(
            f"necklace gives {list(found.pi)}, plot gives {list(derangement.pi)}",
            {"necklace_pi": list(found.pi), "plot_pi": list(derangement.pi)},
        )
    return necklace


def auto_negative_time(
    field: TropicalField,
    start: Optional[float] = None,
    factor: Optional[float] = None,
    max_steps: Optional[int] = None,
) -> Tuple[float, SolitonGraph]:
    """
    Pick a time t << 0: start at ``start`` and multiply by ``factor`` until
    two successive soliton graphs are label isomorphic.

    Returns:
        Tuple[float, SolitonGraph]: The later of the two times and its graph.

    Raises:
        TimeSelectionError: If no stable pair is found within ``max_steps``.
    """
    t = config.AUTO_TIME["start"] if start is None else start
    factor = config.AUTO_TIME["factor"] if factor is None else factor
    max_steps = config.AUTO_TIME["max_steps"] if max_steps is None else max_steps

    previous = None
    for step in range(max_steps):
        plot = contour_plot(field, t)
        if plot.generic:
            graph = soliton_graph(plot)
            plabic = plabic_from_soliton_graph(graph)
            if previous is not None and is_label_isomorphic(previous, plabic):
                logger.info(f"soliton graph stable at t={t} after {step + 1} steps")
                return t, graph
            previous = plabic
        else:
            previous = None
        logger.debug(f"t={t}: graph not yet stable")
        t *= factor
    raise TimeSelectionError(f"soliton graphs did not stabilise within {max_steps} steps", {"last_time": t})


@dataclass
class SandwichReport:
    """Bounds f_A <= ln tau <= f_A + ln|M| on sampled points."""
    count: int
    max_lower_violation: float
    max_upper_violation: float

    @property
    def ok(self) -> bool:
        return self.max_lower_violation <= 1e-9 and self.max_upper_violation <= 1e-9


def sample_sandwich(
    field: TropicalField,
    point: GrassmannPoint,
    kappa: KappaParams,
    t: float,
    rng: np.random.Generator,
    count: int = 100,
    radius: float = 10.0,
) -> SandwichReport:
    """Check the log-sum-exp bounds at ``count`` random points of a square."""
    log_m = math.log(len(field.terms))
    lower, upper = 0.0, 0.0
    for _ in range(count):
        x, y = rng.uniform(-radius, radius, size=2)
        f = field.value(x, y, t)
        value, _ = log_tau(point, kappa, x, y, t)
        scale = max(1.0, abs(f))
        lower = max(lower, (f - value) / scale)
        upper = max(upper, (value - f - log_m) / scale)
    return SandwichReport(count=count, max_lower_violation=lower, max_upper_violation=upper)
