"""
Generalized plabic graphs.

A plabic graph is stored as a NetworkX ``MultiGraph`` whose edge keys are
integer edge ids, together with a rotation system (the counterclockwise
order of edge ids around every vertex) and the counterclockwise order of
the boundary vertices on the disk. X-crossings are explicit degree-4
vertices whose opposite edges sit two positions apart in the rotation.

The module computes trips by the rules of the road, trip permutations,
faces of the disk embedding, the canonical edge and region labelling,
rooted planar isomorphism and a few necessary conditions for reducedness.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

import networkx as nx

from core.errors import InconsistentLabels, InputFormatError, StuckTrip

# Configure logging
logger = logging.getLogger(__name__)

# (edge id, tail vertex)
Dart = Tuple[int, int]


class VertexColor(str, Enum):
    """Vertex kinds of a generalized plabic graph."""
    BLACK = "black"
    WHITE = "white"
    BOUNDARY = "boundary"
    CROSSING = "crossing"


@dataclass(frozen=True)
class TripDecomposition:
    """Trips T_i as dart sequences and the trip permutation."""
    trips: Dict[int, Tuple[Dart, ...]]
    permutation: Tuple[int, ...]

    def ends(self, label: int) -> int:
        return self.permutation[label - 1]


@dataclass(frozen=True)
class FaceLabeling:
    """Edge labels {i, j} and region labels of a plabic graph."""
    edge_labels: Dict[int, Tuple[int, ...]]
    region_labels: Dict[int, FrozenSet[int]]
    boundary_regions: Tuple[int, ...]

    def unbounded_labels(self) -> List[Tuple[int, ...]]:
        """Labels of the boundary regions in counterclockwise order."""
        return [tuple(sorted(self.region_labels[f])) for f in self.boundary_regions]


@dataclass
class HeuristicResult:
    """Outcome of the reducedness heuristic."""
    passed: bool
    reason: Optional[str] = None
    details: Dict[str, Any] = field(default_factory=dict)


class GeneralizedPlabicGraph:
    """
    Disk-embedded graph with black, white, boundary and crossing vertices.

    Attributes:
        graph: MultiGraph keyed by edge id; nodes carry ``color``, ``label``
            (boundary only) and ``position`` (optional drawing coordinates).
        rotation: Counterclockwise edge ids around every vertex.
        boundary_order: Boundary vertices in counterclockwise order.
    """

    def __init__(
        self,
        colors: Dict[int, VertexColor],
        edges: Dict[int, Tuple[int, int]],
        rotation: Dict[int, List[int]],
        boundary_order: List[int],
        boundary_labels: Dict[int, int],
        positions: Optional[Dict[int, Tuple[float, float]]] = None,
    ):
        """
        Build and validate a graph.

        Args:
            colors: Colour of every vertex.
            edges: Edge id to endpoint pair.
            rotation: Counterclockwise edge ids around every vertex.
            boundary_order: Boundary vertex ids in counterclockwise order.
            boundary_labels: Boundary vertex id to label in 1..n.
            positions: Optional coordinates used for drawing.

        Raises:
            InputFormatError: If the data violate the graph invariants.
        """
        self.graph = nx.MultiGraph()
        positions = positions or {}
        for vertex, color in colors.items():
            self.graph.add_node(
                vertex,
                color=VertexColor(color),
                label=boundary_labels.get(vertex),
                position=positions.get(vertex),
            )
        for edge_id, (u, v) in edges.items():
            if u == v:
                raise InputFormatError(f"edge {edge_id} is a loop")
            self.graph.add_edge(u, v, key=edge_id)
        self.edges: Dict[int, Tuple[int, int]] = dict(edges)
        self.rotation: Dict[int, List[int]] = {v: list(r) for v, r in rotation.items()}
        self.boundary_order: List[int] = list(boundary_order)
        self._validate()

    def _validate(self):
        for vertex, data in self.graph.nodes(data=True):
            incident = sorted(key for _, _, key in self.graph.edges(vertex, keys=True))
            if sorted(self.rotation.get(vertex, [])) != incident:
                raise InputFormatError(f"rotation at vertex {vertex} does not list its incident edges")
            degree = len(incident)
            color = data["color"]
            if color == VertexColor.BOUNDARY and degree != 1:
                raise InputFormatError(f"boundary vertex {vertex} has degree {degree}")
            if color == VertexColor.CROSSING and degree != 4:
                raise InputFormatError(f"crossing {vertex} has degree {degree}")
            if color in (VertexColor.BLACK, VertexColor.WHITE) and degree < 1:
                raise InputFormatError(f"internal vertex {vertex} is isolated")

        boundary = [v for v, c in self.graph.nodes(data="color") if c == VertexColor.BOUNDARY]
        if sorted(boundary) != sorted(self.boundary_order):
            raise InputFormatError("boundary order must list every boundary vertex once")
        labels = sorted(self.graph.nodes[v]["label"] or 0 for v in boundary)
        if labels != list(range(1, len(boundary) + 1)):
            raise InputFormatError(f"boundary labels {labels} are not 1..{len(boundary)}")
        if self.graph.number_of_nodes() and not nx.is_connected(self.graph):
            raise InputFormatError("plabic graph must be connected")

    @property
    def n(self) -> int:
        return len(self.boundary_order)

    def color(self, vertex: int) -> VertexColor:
        return self.graph.nodes[vertex]["color"]

    def label_of(self, vertex: int) -> Optional[int]:
        return self.graph.nodes[vertex]["label"]

    def position(self, vertex: int) -> Optional[Tuple[float, float]]:
        return self.graph.nodes[vertex]["position"]

    @cached_property
    def boundary_vertex(self) -> Dict[int, int]:
        """Boundary label to vertex id."""
        return {self.label_of(v): v for v in self.boundary_order}

    def other_end(self, edge_id: int, vertex: int) -> int:
        u, v = self.edges[edge_id]
        return v if u == vertex else u

    def crossings(self) -> List[int]:
        return sorted(v for v, c in self.graph.nodes(data="color") if c == VertexColor.CROSSING)

    def crossing_pairs(self, vertex: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        r = self.rotation[vertex]
        return (r[0], r[2]), (r[1], r[3])

    def boundary_label_sequence(self) -> List[int]:
        """Boundary labels read counterclockwise."""
        return [self.label_of(v) for v in self.boundary_order]

    def __repr__(self) -> str:
        return (
            f"GeneralizedPlabicGraph(n={self.n}, vertices={self.graph.number_of_nodes()}, "
            f"edges={len(self.edges)}, crossings={len(self.crossings())})"
        )

    def normalized(self) -> "GeneralizedPlabicGraph":
        """Copy with degree-2 internal vertices contracted."""
        return contract_degree_two(self)

    def to_dict(self) -> Dict[str, Any]:
        vertices = []
        for vertex in sorted(self.graph.nodes):
            entry: Dict[str, Any] = {"id": vertex, "color": self.color(vertex).value}
            if self.label_of(vertex) is not None:
                entry["label"] = self.label_of(vertex)
            if self.position(vertex) is not None:
                entry["position"] = [float(x) for x in self.position(vertex)]
            vertices.append(entry)
        return {
            "vertices": vertices,
            "edges": [{"id": e, "ends": list(self.edges[e])} for e in sorted(self.edges)],
            "rotation": {str(v): list(self.rotation[v]) for v in sorted(self.rotation)},
            "boundary_order": list(self.boundary_order),
            "crossings": [
                {"vertex": v, "pairs": [list(p) for p in self.crossing_pairs(v)]} for v in self.crossings()
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GeneralizedPlabicGraph":
        try:
            colors = {int(v["id"]): VertexColor(v["color"]) for v in data["vertices"]}
            labels = {int(v["id"]): int(v["label"]) for v in data["vertices"] if v.get("label") is not None}
            positions = {int(v["id"]): tuple(v["position"]) for v in data["vertices"] if v.get("position")}
            edges = {int(e["id"]): (int(e["ends"][0]), int(e["ends"][1])) for e in data["edges"]}
            rotation = {int(v): [int(e) for e in r] for v, r in data["rotation"].items()}
            order = [int(v) for v in data["boundary_order"]]
        except (KeyError, TypeError, ValueError) as e:
            raise InputFormatError(f"Malformed graph JSON: {e}") from e
        return cls(colors, edges, rotation, order, labels, positions)


def splice_degree_two(
    edges: Dict[int, Tuple[int, int]],
    rotation: Dict[int, List[int]],
    removable: Iterable[int],
) -> Set[int]:
    """
    Splice out degree-2 vertices from ``removable`` in place.

    The surviving edge keeps the id of the first of the two merged edges
    and takes the place of the dropped one in the rotation of its far
    endpoint. Splices that would create a loop are skipped.

    Returns:
        Set[int]: The vertices removed.
    """
    removed: Set[int] = set()
    for vertex in sorted(removable):
        if len(rotation.get(vertex, [])) != 2:
            continue
        keep, drop = rotation[vertex]
        a = _other(edges[keep], vertex)
        b = _other(edges[drop], vertex)
        if a == b:
            continue
        rotation[b] = [keep if e == drop else e for e in rotation[b]]
        edges[keep] = (a, b)
        del edges[drop]
        del rotation[vertex]
        removed.add(vertex)
    return removed


def contract_degree_two(g: GeneralizedPlabicGraph) -> GeneralizedPlabicGraph:
    """Copy of ``g`` with internal degree-2 vertices spliced out."""
    colors = {v: g.color(v) for v in g.graph.nodes}
    edges = dict(g.edges)
    rotation = {v: list(r) for v, r in g.rotation.items()}
    positions = {v: g.position(v) for v in g.graph.nodes if g.position(v) is not None}
    labels = {v: g.label_of(v) for v in g.boundary_order}

    internal = [v for v, c in colors.items() if c in (VertexColor.BLACK, VertexColor.WHITE)]
    for vertex in splice_degree_two(edges, rotation, internal):
        del colors[vertex]
        positions.pop(vertex, None)
    return GeneralizedPlabicGraph(colors, edges, rotation, g.boundary_order, labels, positions)


def _other(ends: Tuple[int, int], vertex: int) -> int:
    return ends[1] if ends[0] == vertex else ends[0]


def _next_edge(g: GeneralizedPlabicGraph, vertex: int, edge_id: int) -> Optional[int]:
    """Edge by which a trip leaves ``vertex`` after arriving along ``edge_id``."""
    color = g.color(vertex)
    if color == VertexColor.BOUNDARY:
        return None
    rot = g.rotation[vertex]
    d = len(rot)
    if edge_id not in rot:
        raise StuckTrip(f"edge {edge_id} is missing from the rotation at {vertex}")
    p = rot.index(edge_id)
    if color == VertexColor.CROSSING:
        return rot[(p + 2) % 4]
    if d == 2:
        return rot[(p + 1) % 2]
    if color == VertexColor.BLACK:
        return rot[(p + 1) % d]
    return rot[(p - 1) % d]


def trips(g: GeneralizedPlabicGraph) -> TripDecomposition:
    """
    Follow the rules of the road from every boundary vertex.

    A trip turns maximally right at black vertices, maximally left at
    white vertices, goes straight through crossings and continues through
    degree-2 vertices.

    Raises:
        StuckTrip: If a trip never returns to the boundary.
    """
    limit = 2 * len(g.edges) + 2
    result: Dict[int, Tuple[Dart, ...]] = {}
    permutation = [0] * g.n
    for label in range(1, g.n + 1):
        start = g.boundary_vertex[label]
        (edge_id,) = g.rotation[start]
        tail = start
        darts: List[Dart] = []
        while True:
            darts.append((edge_id, tail))
            head = g.other_end(edge_id, tail)
            if len(darts) > limit:
                raise StuckTrip(f"trip from boundary {label} does not terminate", {"label": label})
            following = _next_edge(g, head, edge_id)
            if following is None:
                permutation[label - 1] = g.label_of(head)
                break
            edge_id, tail = following, head
        result[label] = tuple(darts)
    logger.debug(f"trip permutation {permutation}")
    return TripDecomposition(trips=result, permutation=tuple(permutation))


def trip_permutation(g: GeneralizedPlabicGraph) -> Tuple[int, ...]:
    return trips(g).permutation


def _reverse(g: GeneralizedPlabicGraph, dart: Dart) -> Dart:
    edge_id, tail = dart
    return edge_id, g.other_end(edge_id, tail)


@dataclass(frozen=True)
class FaceStructure:
    """Faces of the disk embedding; boundary arcs carry negative ids."""
    faces: Tuple[Tuple[Dart, ...], ...]
    face_of: Dict[Dart, int]
    boundary_faces: Tuple[int, ...]


def face_structure(g: GeneralizedPlabicGraph) -> FaceStructure:
    """
    Trace the faces of the rotation system closed up by boundary arcs.

    Arc ``-(i+1)`` runs from ``boundary_order[i]`` to the next boundary
    vertex counterclockwise; the face on its left is the boundary region
    between them. The outer face (all arcs) is dropped.
    """
    order = g.boundary_order
    n = len(order)
    ends: Dict[int, Tuple[int, int]] = dict(g.edges)
    rotation = {v: list(r) for v, r in g.rotation.items()}
    for i, vertex in enumerate(order):
        ends[-(i + 1)] = (vertex, order[(i + 1) % n])
    for i, vertex in enumerate(order):
        arc_out = -(i + 1)
        arc_in = -((i - 1) % n + 1)
        rotation[vertex] = [arc_out] + rotation[vertex] + [arc_in]

    def head(dart: Dart) -> int:
        u, v = ends[dart[0]]
        return v if dart[1] == u else u

    def next_dart(dart: Dart) -> Dart:
        vertex = head(dart)
        rot = rotation[vertex]
        p = rot.index(dart[0])
        return rot[(p - 1) % len(rot)], vertex

    darts = []
    for edge_id, (u, v) in ends.items():
        darts.append((edge_id, u))
        darts.append((edge_id, v))
    seen: Set[Dart] = set()
    traced: List[Tuple[Dart, ...]] = []
    for dart in sorted(darts):
        if dart in seen:
            continue
        cycle = []
        current = dart
        while current not in seen:
            seen.add(current)
            cycle.append(current)
            current = next_dart(current)
        traced.append(tuple(cycle))

    faces = []
    face_of: Dict[Dart, int] = {}
    for cycle in traced:
        if all(edge_id < 0 for edge_id, _ in cycle):
            continue
        index = len(faces)
        faces.append(cycle)
        for dart in cycle:
            face_of[dart] = index

    boundary_faces = tuple(face_of[(-(i + 1), order[i])] for i in range(n))
    return FaceStructure(faces=tuple(faces), face_of=face_of, boundary_faces=boundary_faces)


def faces(g: GeneralizedPlabicGraph) -> List[Tuple[Dart, ...]]:
    """Faces as dart cycles, the outer face excluded."""
    return list(face_structure(g).faces)


def dual_graph(g: GeneralizedPlabicGraph, structure: Optional[FaceStructure] = None) -> nx.MultiGraph:
    """Faces joined across every interior edge, keyed by edge id."""
    structure = structure or face_structure(g)
    dual = nx.MultiGraph()
    dual.add_nodes_from(range(len(structure.faces)))
    for edge_id, (u, v) in g.edges.items():
        dual.add_edge(structure.face_of[(edge_id, u)], structure.face_of[(edge_id, v)], key=edge_id)
    return dual


def label(g: GeneralizedPlabicGraph) -> FaceLabeling:
    """
    Canonical labelling: edge e gets the trips through it, face F gets
    {i : F lies to the left of T_i}.

    Raises:
        InconsistentLabels: If region labels differ in size.
    """
    decomposition = trips(g)
    structure = face_structure(g)
    dual = dual_graph(g, structure)

    edge_labels: Dict[int, Set[int]] = {e: set() for e in g.edges}
    region_labels: Dict[int, Set[int]] = {f: set() for f in range(len(structure.faces))}
    for i, darts in decomposition.trips.items():
        used = {edge_id for edge_id, _ in darts}
        for edge_id in used:
            edge_labels[edge_id].add(i)
        cut = dual.copy()
        cut.remove_edges_from([(u, v, key) for u, v, key in dual.edges(keys=True) if key in used])
        left = {structure.face_of[dart] for dart in darts}
        marked: Set[int] = set()
        for face in left:
            if face not in marked:
                marked |= nx.node_connected_component(cut, face)
        for face in marked:
            region_labels[face].add(i)

    sizes = {len(labels) for labels in region_labels.values()}
    if len(sizes) > 1:
        raise InconsistentLabels(
            f"region labels have sizes {sorted(sizes)}",
            {"sizes": sorted(sizes)},
        )
    return FaceLabeling(
        edge_labels={e: tuple(sorted(s)) for e, s in edge_labels.items()},
        region_labels={f: frozenset(s) for f, s in region_labels.items()},
        boundary_regions=structure.boundary_faces,
    )


def exchange_violations(g: GeneralizedPlabicGraph, labeling: FaceLabeling) -> List[int]:
    """Edges whose two sides are not related by S and (S minus {i}) plus {j}."""
    structure = face_structure(g)
    violations = []
    for edge_id, (u, v) in sorted(g.edges.items()):
        a = labeling.region_labels[structure.face_of[(edge_id, u)]]
        b = labeling.region_labels[structure.face_of[(edge_id, v)]]
        pair = labeling.edge_labels.get(edge_id, ())
        if len(pair) != 2:
            violations.append(edge_id)
            continue
        i, j = pair
        if not ((a - b == {i} and b - a == {j}) or (a - b == {j} and b - a == {i})):
            violations.append(edge_id)
    return violations


def plabic_from_soliton_graph(soliton_graph) -> GeneralizedPlabicGraph:
    """
    Forget the labels of a soliton graph.

    The boundary vertex at the end of the unbounded edge of type [i, j]
    is labelled j when the ray goes up and i when it goes down, which is
    pi(i) for the soliton {i, pi(i)}. Degree-2 vertices are contracted.
    """
    labels = {}
    for vertex in soliton_graph.boundary_order:
        i, j = soliton_graph.ray_types[vertex]
        labels[vertex] = max(i, j) if soliton_graph.ray_sides[vertex] == "top" else min(i, j)
    g = GeneralizedPlabicGraph(
        soliton_graph.colors,
        soliton_graph.edges,
        soliton_graph.rotation,
        soliton_graph.boundary_order,
        labels,
        soliton_graph.positions,
    )
    return contract_degree_two(g)


def is_label_isomorphic(g1: GeneralizedPlabicGraph, g2: GeneralizedPlabicGraph) -> bool:
    """
    Rooted planar isomorphism respecting colours, boundary labels and
    rotation order, after contracting degree-2 vertices.
    """
    a, b = g1.normalized(), g2.normalized()
    if a.n != b.n or len(a.edges) != len(b.edges) or a.graph.number_of_nodes() != b.graph.number_of_nodes():
        return False
    if a.n == 0:
        return True

    vertex_map: Dict[int, int] = {}
    edge_map: Dict[int, int] = {}
    root_a, root_b = a.boundary_vertex[1], b.boundary_vertex[1]
    queue = [((a.rotation[root_a][0], root_a), (b.rotation[root_b][0], root_b))]
    vertex_map[root_a] = root_b
    while queue:
        (ea, ta), (eb, tb) = queue.pop()
        if edge_map.setdefault(ea, eb) != eb:
            return False
        ha, hb = a.other_end(ea, ta), b.other_end(eb, tb)
        if vertex_map.setdefault(ha, hb) != hb:
            return False
        if a.color(ha) != b.color(hb) or a.label_of(ha) != b.label_of(hb):
            return False
        rot_a, rot_b = a.rotation[ha], b.rotation[hb]
        if len(rot_a) != len(rot_b):
            return False
        pa, pb = rot_a.index(ea), rot_b.index(eb)
        for step in range(1, len(rot_a)):
            na, nb = rot_a[(pa + step) % len(rot_a)], rot_b[(pb + step) % len(rot_b)]
            if na in edge_map:
                if edge_map[na] != nb:
                    return False
                continue
            queue.append(((na, ha), (nb, hb)))
    return len(vertex_map) == a.graph.number_of_nodes() and len(set(vertex_map.values())) == len(vertex_map)


def reduced_heuristic(g: GeneralizedPlabicGraph) -> HeuristicResult:
    """
    Necessary conditions for reducedness.

    Fails when the graph has X-crossings, a trip uses some edge twice,
    some dart lies on a closed trip, or two trips share two edges in the
    same order (a bad double crossing).
    """
    if g.crossings():
        return HeuristicResult(False, "graph has X-crossings", {"crossings": g.crossings()})
    try:
        decomposition = trips(g)
    except StuckTrip as e:
        return HeuristicResult(False, "stuck trip", {"message": e.message})

    for i, darts in decomposition.trips.items():
        used = [edge_id for edge_id, _ in darts]
        if len(used) != len(set(used)):
            return HeuristicResult(False, "trip uses an edge twice", {"trip": i})

    covered = {dart for darts in decomposition.trips.values() for dart in darts}
    all_darts = {(e, u) for e, (u, v) in g.edges.items()} | {(e, v) for e, (u, v) in g.edges.items()}
    if covered != all_darts:
        return HeuristicResult(False, "closed trip", {"darts": len(all_darts - covered)})

    positions = {
        i: {edge_id: index for index, (edge_id, _) in enumerate(darts)}
        for i, darts in decomposition.trips.items()
    }
    labels = sorted(positions)
    for x, i in enumerate(labels):
        for j in labels[x + 1:]:
            shared = sorted(set(positions[i]) & set(positions[j]), key=lambda e: positions[i][e])
            for e1, e2 in zip(shared, shared[1:]):
                if positions[j][e1] < positions[j][e2]:
                    return HeuristicResult(False, "bad double crossing", {"trips": [i, j], "edges": [e1, e2]})
    return HeuristicResult(True)


def unbounded_region_labels(g: GeneralizedPlabicGraph, start_label: Optional[int] = None) -> List[Tuple[int, ...]]:
    """
    Region labels along the boundary, counterclockwise.

    With ``start_label`` the reading starts at the region that follows the
    boundary vertex with that label.
    """
    labeling = label(g)
    regions = labeling.unbounded_labels()
    if start_label is None:
        return regions
    offset = g.boundary_order.index(g.boundary_vertex[start_label])
    return regions[offset:] + regions[:offset]


def from_edge_list(
    colors: Dict[int, str],
    rotation: Dict[int, Iterable[int]],
    edges: Dict[int, Tuple[int, int]],
    boundary: Iterable[Tuple[int, int]],
) -> GeneralizedPlabicGraph:
    """Convenience constructor; ``boundary`` is (vertex, label) in counterclockwise order."""
    boundary = list(boundary)
    return GeneralizedPlabicGraph(
        {v: VertexColor(c) for v, c in colors.items()},
        edges,
        {v: list(r) for v, r in rotation.items()},
        [v for v, _ in boundary],
        dict(boundary),
    )


def contract_monochrome(g: GeneralizedPlabicGraph) -> GeneralizedPlabicGraph:
    """
    Copy of ``g`` with every edge between two internal vertices of the same
    colour contracted. Trips and face labels are unchanged by this move, so
    graphs that differ only in how they resolve high-degree vertices
    compare equal afterwards.
    """
    colors = {v: g.color(v) for v in g.graph.nodes}
    edges = dict(g.edges)
    rotation = {v: list(r) for v, r in g.rotation.items()}
    positions = {v: g.position(v) for v in g.graph.nodes if g.position(v) is not None}
    labels = {v: g.label_of(v) for v in g.boundary_order}

    changed = True
    while changed:
        changed = False
        for edge_id, (u, v) in sorted(edges.items()):
            if colors[u] != colors[v] or colors[u] not in (VertexColor.BLACK, VertexColor.WHITE):
                continue
            if sum(1 for a, b in edges.values() if {a, b} == {u, v}) > 1:
                continue
            pu, pv = rotation[u].index(edge_id), rotation[v].index(edge_id)
            merged = rotation[u][pu + 1:] + rotation[u][:pu] + rotation[v][pv + 1:] + rotation[v][:pv]
            for other in rotation[v]:
                if other != edge_id:
                    a, b = edges[other]
                    edges[other] = (u if a == v else a, u if b == v else b)
            rotation[u] = merged
            del edges[edge_id]
            del rotation[v]
            del colors[v]
            positions.pop(v, None)
            changed = True
            break
    return GeneralizedPlabicGraph(colors, edges, rotation, g.boundary_order, labels, positions)
