"""
Triangulations of an n-gon and the soliton graphs of the totally positive Gr(2, n).

Polygon vertex m sits at angle 2*pi*(m-1)/n on the unit circle. A
triangulation is stored as its set of diagonals (i, j) with i < j.
"""

import logging
import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

import config
from core.errors import InputFormatError, NotADiagonal, NotFound
from core.grassmann import GrassmannPoint, KappaParams, Subset
from core.le_to_plabic import GraphBuilder
from core.plabic_graph import (
    GeneralizedPlabicGraph,
    VertexColor,
    contract_monochrome,
    is_label_isomorphic,
    plabic_from_soliton_graph,
)
from core.soliton_engine import contour_plot, soliton_graph, tropical_field

# Configure logging
logger = logging.getLogger(__name__)

Chord = Tuple[int, int]


def _chord(i: int, j: int) -> Chord:
    return (i, j) if i < j else (j, i)


def _crosses(a: Chord, b: Chord) -> bool:
    (p, q), (r, s) = a, b
    return p < r < q < s or r < p < s < q


@dataclass(frozen=True)
class Triangulation:
    """A set of n-3 pairwise non-crossing diagonals of the n-gon."""
    n: int
    diagonals: FrozenSet[Chord]

    def __post_init__(self):
        if self.n < 3:
            raise InputFormatError(f"a polygon needs at least 3 vertices, got {self.n}")
        for i, j in self.diagonals:
            if not (1 <= i < j <= self.n) or j - i < 2 or (i, j) == (1, self.n):
                raise InputFormatError(f"({i}, {j}) is not a diagonal of the {self.n}-gon")
        if len(self.diagonals) != self.n - 3:
            raise InputFormatError(f"expected {self.n - 3} diagonals, got {len(self.diagonals)}")
        for a, b in combinations(sorted(self.diagonals), 2):
            if _crosses(a, b):
                raise InputFormatError(f"diagonals {a} and {b} cross")

    @classmethod
    def from_chords(cls, n: int, chords: Iterable[Sequence[int]]) -> "Triangulation":
        return cls(n, frozenset(_chord(int(i), int(j)) for i, j in chords))

    @classmethod
    def parse(cls, n: int, text: str) -> "Triangulation":
        """Parse "1-3,1-4,1-5"."""
        chords = []
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            try:
                i, j = item.split("-")
                chords.append((int(i), int(j)))
            except ValueError as e:
                raise InputFormatError(f"bad diagonal {item!r}, expected i-j") from e
        return cls.from_chords(n, chords)

    @cached_property
    def polygon_edges(self) -> Tuple[Chord, ...]:
        return tuple(_chord(m, m % self.n + 1) for m in range(1, self.n + 1))

    @cached_property
    def triangles(self) -> Tuple[Tuple[int, int, int], ...]:
        sides = set(self.diagonals) | set(self.polygon_edges)
        return tuple(
            tri for tri in combinations(range(1, self.n + 1), 3)
            if all(_chord(a, b) in sides for a, b in combinations(tri, 2))
        )

    def sorted_diagonals(self) -> List[Chord]:
        return sorted(self.diagonals)

    def key(self) -> Tuple[Chord, ...]:
        return tuple(self.sorted_diagonals())

    def to_dict(self) -> Dict[str, object]:
        return {"n": self.n, "diagonals": [list(d) for d in self.sorted_diagonals()]}


def flip(t: Triangulation, d: Sequence[int]) -> Triangulation:
    """
    Replace the diagonal d = {a, c} by the other diagonal {b, d} of the
    quadrilateral formed by its two triangles.

    Raises:
        NotADiagonal: If ``d`` is not a diagonal of ``t``.
    """
    chord = _chord(*d)
    if chord not in t.diagonals:
        raise NotADiagonal(f"{list(chord)} is not a diagonal of the triangulation", {"diagonal": list(chord)})
    apexes = [
        next(v for v in tri if v not in chord)
        for tri in t.triangles
        if chord[0] in tri and chord[1] in tri
    ]
    replacement = _chord(*apexes)
    logger.debug(f"flip {chord} -> {replacement}")
    return Triangulation(t.n, (t.diagonals - {chord}) | {replacement})


def enumerate_triangulations(n: int) -> List[Triangulation]:
    """All triangulations of the n-gon (a Catalan number of them)."""

    def split(vertices: Tuple[int, ...]) -> List[FrozenSet[Chord]]:
        if len(vertices) <= 3:
            return [frozenset()]
        first, last = vertices[0], vertices[-1]
        result = []
        for k in range(1, len(vertices) - 1):
            apex = vertices[k]
            own = set()
            if k != 1:
                own.add(_chord(first, apex))
            if k != len(vertices) - 2:
                own.add(_chord(apex, last))
            for left in split(vertices[: k + 1]):
                for right in split(vertices[k:]):
                    result.append(frozenset(own) | left | right)
        return result

    found = sorted({tuple(sorted(d)) for d in split(tuple(range(1, n + 1)))})
    return [Triangulation(n, frozenset(d)) for d in found]


def flip_graph(n: int) -> nx.Graph:
    """Triangulations of the n-gon joined when they differ by one flip."""
    graph = nx.Graph()
    triangulations = enumerate_triangulations(n)
    for t in triangulations:
        graph.add_node(t.key(), triangulation=t)
    for t in triangulations:
        for d in t.sorted_diagonals():
            graph.add_edge(t.key(), flip(t, d).key(), diagonal=d)
    return graph


def _corner(n: int, m: int, radius: float = 1.0) -> Tuple[float, float]:
    angle = 2 * math.pi * (m - 1) / n
    return radius * math.cos(angle), radius * math.sin(angle)


def psi(t: Triangulation) -> GeneralizedPlabicGraph:
    """
    Soliton graph of a triangulation.

    A black vertex goes inside every triangle and is joined to its
    corners. Corners on a diagonal are white; the other corners are black
    and merge with the black vertex of their (only) triangle. Every corner
    then gets an unbounded edge, and vertices of degree above three are
    split into fans of trivalent vertices of the same colour.

    The boundary vertex at corner m has label m-1 (mod n), so the region
    between corners m and m+1 is labelled {m, m+1}.
    """
    n = t.n
    on_diagonal = {v for d in t.diagonals for v in d}
    builder = GraphBuilder()
    anchor: Dict[int, int] = {}
    for tri in t.triangles:
        centroid = tuple(sum(_corner(n, m)[axis] for m in tri) / 3 for axis in range(2))
        center = builder.vertex(("triangle", tri), centroid, VertexColor.BLACK)
        for m in tri:
            if m in on_diagonal:
                anchor[m] = builder.vertex(("corner", m), _corner(n, m), VertexColor.WHITE)
                builder.edge(center, anchor[m])
            else:
                anchor[m] = center

    boundary = []
    labels = {}
    for m in range(1, n + 1):
        vertex = builder.vertex(("boundary", m), _corner(n, m, 1.5), VertexColor.BOUNDARY)
        builder.edge(anchor[m], vertex)
        boundary.append(vertex)
        labels[vertex] = (m - 2) % n + 1

    colors = dict(builder.colors)
    edges = dict(builder.edges)
    rotation = builder.rotation()
    positions = dict(builder.positions)
    _resolve(colors, edges, rotation, positions)
    return GeneralizedPlabicGraph(colors, edges, rotation, boundary, labels, positions)


def _resolve(colors, edges, rotation, positions):
    """Split internal vertices of degree d > 3 into d-2 trivalent ones, in place."""
    next_vertex = max(colors) + 1
    next_edge = max(edges) + 1
    for vertex in sorted(colors):
        if colors[vertex] == VertexColor.BOUNDARY or len(rotation[vertex]) <= 3:
            continue
        rot = rotation[vertex]
        x, y = positions[vertex]
        current, rest = vertex, rot[2:]
        rotation[vertex] = rot[:2]
        step = 1
        while True:
            link = next_edge
            next_edge += 1
            fresh = next_vertex
            next_vertex += 1
            colors[fresh] = colors[vertex]
            positions[fresh] = (x * (1 - 0.1 * step), y * (1 - 0.1 * step))
            edges[link] = (current, fresh)
            rotation[current] = rotation[current] + [link]
            for e in rest[:1]:
                a, b = edges[e]
                edges[e] = (fresh if a == vertex else a, fresh if b == vertex else b)
            if len(rest) == 2:
                for e in rest[1:]:
                    a, b = edges[e]
                    edges[e] = (fresh if a == vertex else a, fresh if b == vertex else b)
                rotation[fresh] = [link] + rest
                break
            rotation[fresh] = [link, rest[0]]
            current, rest = fresh, rest[1:]
            step += 1


def exchange_check(point: GrassmannPoint, quad: Sequence[int], rtol: float = 1e-10) -> bool:
    """
    Three-term relation D_ac D_bd = D_ab D_cd + D_ad D_bc for a < b < c < d.

    Raises:
        InputFormatError: If the point is not in Gr(2, n) or the quad is not increasing.
    """
    if point.k != 2:
        raise InputFormatError(f"exchange relations are checked in Gr(2, n), got k={point.k}")
    a, b, c, d = quad
    if not a < b < c < d:
        raise InputFormatError(f"quad must be increasing, got {list(quad)}")
    p = point.pluecker
    lhs = p[(a, c)] * p[(b, d)]
    rhs = p[(a, b)] * p[(c, d)] + p[(a, d)] * p[(b, c)]
    scale = max(abs(lhs), abs(p[(a, b)] * p[(c, d)]), abs(p[(a, d)] * p[(b, c)]), 1e-300)
    return abs(lhs - rhs) <= rtol * scale


def cluster_pluecker(t: Triangulation, values: Dict[Chord, float]) -> Dict[Subset, float]:
    """
    Every Plücker coordinate of a totally positive Gr(2, n) point from the
    values on the diagonals and polygon edges of ``t``, by exchange relations.

    Raises:
        InputFormatError: If a value is missing or not positive.
    """
    known: Dict[Chord, float] = {}
    for chord in list(t.diagonals) + list(t.polygon_edges):
        value = values.get(chord)
        if value is None or value <= 0:
            raise InputFormatError(f"cluster value for {list(chord)} must be positive, got {value}")
        known[chord] = float(value)

    # Flipping through the flip graph reaches every chord
    queue = deque([t])
    seen = {t.key()}
    while queue:
        current = queue.popleft()
        for d in current.sorted_diagonals():
            flipped = flip(current, d)
            if flipped.key() in seen:
                continue
            a, c = d
            b, e = next(iter(flipped.diagonals - current.diagonals))
            quad = sorted({a, b, c, e})
            p, q, r, s = quad
            new = _chord(b, e)
            if new not in known:
                # new * old = opposite sides products
                known[new] = (known[_chord(p, q)] * known[_chord(r, s)] + known[_chord(p, s)] * known[_chord(q, r)]) / known[d]
            seen.add(flipped.key())
            queue.append(flipped)
    return {chord: known[chord] for chord in sorted(known)}


def point_from_cluster(t: Triangulation, values: Dict[Chord, float]) -> GrassmannPoint:
    """The 2 x n matrix with columns (-D_2j, D_1j) / D_12."""
    pluecker = cluster_pluecker(t, values)

    def delta(i: int, j: int) -> float:
        if i == j:
            return 0.0
        return pluecker[_chord(i, j)] if i < j else -pluecker[_chord(i, j)]

    base = pluecker[(1, 2)]
    rows = [
        [-delta(2, j) / base for j in range(1, t.n + 1)],
        [delta(1, j) / base for j in range(1, t.n + 1)],
    ]
    rows[0][0], rows[1][0] = 1.0, 0.0
    rows[0][1], rows[1][1] = 0.0, 1.0
    return GrassmannPoint(np.array(rows))


@dataclass
class Realization:
    """A point and time whose soliton graph matches psi(T)."""
    triangulation: Triangulation
    point: GrassmannPoint
    time: float
    log_scale: float


def realize(
    t: Triangulation,
    kappa: KappaParams,
    times: Optional[Sequence[float]] = None,
    log_scales: Optional[Sequence[float]] = None,
) -> Realization:
    """
    Search for a point and time whose soliton graph is psi(T).

    The diagonals of T get cluster value e^s and the polygon edges 1; for
    each s the times are scanned in order and the first match wins.

    Raises:
        NotFound: If no (s, t) pair reproduces psi(T).
    """
    times = config.REALIZATION["times"] if times is None else times
    log_scales = config.REALIZATION["log_scales"] if log_scales is None else log_scales
    target = contract_monochrome(psi(t))

    for s in log_scales:
        values = {chord: 1.0 for chord in t.polygon_edges}
        values.update({chord: math.exp(s) for chord in t.diagonals})
        point = point_from_cluster(t, values)
        field = tropical_field(point, kappa)
        for time in times:
            plot = contour_plot(field, time)
            if not plot.generic:
                continue
            candidate = contract_monochrome(plabic_from_soliton_graph(soliton_graph(plot)))
            if is_label_isomorphic(target, candidate):
                logger.info(f"psi{list(t.key())} realised with scale e^{s} at t={time}")
                return Realization(triangulation=t, point=point, time=float(time), log_scale=float(s))
    raise NotFound(f"no soliton graph matched psi{list(t.key())}", {"diagonals": [list(d) for d in t.key()]})
