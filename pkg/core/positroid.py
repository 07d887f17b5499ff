"""
Positroid combinatorics.

Grassmann necklaces, derangements and Le-diagrams index the cells of the
totally nonnegative Grassmannian. This module implements the bijections
between them, the pipe dream reading of a Le-diagram, the constrained
search that inverts it, and the Le-network parametrisation that produces
points inside a given cell.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, product
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from core.errors import InputFormatError, NotANecklace, NotFound, NotIrreducible
from core.grassmann import GrassmannPoint, PositroidMatroid, Subset

# Configure logging
logger = logging.getLogger(__name__)

PLUS = "+"
ZERO = "0"


def shifted_key(r: int, n: int):
    """Sort key for the order r < r+1 < ... < n < 1 < ... < r-1."""
    return lambda j: (j - r) % n


@dataclass(frozen=True)
class GrassmannNecklace:
    """
    A cyclic sequence (I_1, ..., I_n) of k-subsets of [n].

    Construction validates the exchange condition; consecutive equal terms
    are allowed here and reported through ``is_irreducible``.
    """
    subsets: Tuple[Subset, ...]

    def __post_init__(self):
        n = len(self.subsets)
        if n == 0:
            raise NotANecklace("a necklace needs at least one term")
        normalised = tuple(tuple(sorted(s)) for s in self.subsets)
        object.__setattr__(self, "subsets", normalised)
        k = len(normalised[0])
        for i, current in enumerate(normalised, start=1):
            if len(current) != k or any(not 1 <= j <= n for j in current):
                raise NotANecklace(f"I_{i} = {list(current)} is not a {k}-subset of [{n}]")
            following = set(normalised[i % n])
            if i in current:
                removed = set(current) - {i}
                if not removed <= following:
                    raise NotANecklace(
                        f"I_{i % n + 1} must contain I_{i} without {i}",
                        {"index": i},
                    )
            elif set(current) != following:
                raise NotANecklace(f"I_{i % n + 1} must equal I_{i} since {i} is not in I_{i}", {"index": i})

    @property
    def n(self) -> int:
        return len(self.subsets)

    @property
    def k(self) -> int:
        return len(self.subsets[0])

    def term(self, r: int) -> Subset:
        """I_r for a 1-based, cyclic r."""
        return self.subsets[(r - 1) % self.n]

    def is_irreducible(self) -> bool:
        return all(self.term(i) != self.term(i + 1) for i in range(1, self.n + 1))

    def as_lists(self) -> List[List[int]]:
        return [list(s) for s in self.subsets]


@dataclass(frozen=True)
class Derangement:
    """A permutation of [n] without fixed points, in one-line notation."""
    pi: Tuple[int, ...]

    def __post_init__(self):
        pi = tuple(int(v) for v in self.pi)
        object.__setattr__(self, "pi", pi)
        n = len(pi)
        if sorted(pi) != list(range(1, n + 1)):
            raise InputFormatError(f"{list(pi)} is not a permutation of 1..{n}")
        fixed = [i for i in range(1, n + 1) if pi[i - 1] == i]
        if fixed:
            raise InputFormatError(f"permutation has fixed points {fixed}", {"fixed_points": fixed})

    @property
    def n(self) -> int:
        return len(self.pi)

    def __call__(self, j: int) -> int:
        return self.pi[(j - 1) % self.n]

    @cached_property
    def excedance_positions(self) -> Subset:
        return tuple(i for i in range(1, self.n + 1) if self(i) > i)

    @property
    def k(self) -> int:
        return len(self.excedance_positions)

    def inverse(self) -> "Derangement":
        inv = [0] * self.n
        for j, i in enumerate(self.pi, start=1):
            inv[i - 1] = j
        return Derangement(tuple(inv))


def necklace_from_matroid(matroid: PositroidMatroid) -> GrassmannNecklace:
    """
    Grassmann necklace of a matroid.

    I_r is the lexicographically minimal basis for the order
    r < r+1 < ... < n < 1 < ... < r-1.

    Raises:
        NotANecklace: If the resulting sequence violates the exchange
            condition (the matroid is not a positroid).
    """
    n = matroid.n
    subsets = []
    for r in range(1, n + 1):
        key = shifted_key(r, n)
        best = min(matroid.bases, key=lambda basis: sorted(key(j) for j in basis))
        subsets.append(tuple(sorted(best)))
    return GrassmannNecklace(tuple(subsets))


def derangement_from_necklace(necklace: GrassmannNecklace) -> Derangement:
    """
    Derangement of an irreducible necklace: pi(j) = i whenever
    I_{i+1} = (I_i minus {i}) plus {j}.

    Raises:
        NotIrreducible: If two consecutive terms coincide.
    """
    n = necklace.n
    pi = [0] * n
    for i in range(1, n + 1):
        current, following = set(necklace.term(i)), set(necklace.term(i + 1))
        if current == following:
            raise NotIrreducible(f"I_{i} = I_{i % n + 1}", {"index": i})
        (j,) = following - current
        pi[j - 1] = i
    derangement = Derangement(tuple(pi))
    if derangement.excedance_positions != necklace.term(1):
        raise NotANecklace("excedances do not match I_1")
    return derangement


def necklace_from_derangement(derangement: Derangement) -> GrassmannNecklace:
    """Inverse of ``derangement_from_necklace``."""
    inverse = derangement.inverse()
    current = set(derangement.excedance_positions)
    subsets = [tuple(sorted(current))]
    for i in range(1, derangement.n):
        current = (current - {i}) | {inverse(i)}
        subsets.append(tuple(sorted(current)))
    return GrassmannNecklace(tuple(subsets))


def is_tp_schubert(derangement: Derangement) -> bool:
    """True iff pi^{-1} has at most one descent."""
    inv = derangement.inverse().pi
    descents = sum(1 for a, b in zip(inv, inv[1:]) if a > b)
    return descents <= 1


def shape_from_pivots(pivots: Iterable[int], k: int, n: int) -> Tuple[int, ...]:
    """
    Young diagram whose south-east border, read from the north-east corner,
    has its south steps at the given labels.
    """
    pivots = sorted(pivots)
    if len(pivots) != k:
        raise ValueError(f"expected {k} pivots, got {len(pivots)}")
    return tuple(n - k - i + r for r, i in enumerate(pivots, start=1))


@dataclass(frozen=True)
class LeDiagram:
    """
    Filling of a Young diagram inside the k x (n-k) rectangle by 0 and +.

    ``rows`` holds one string per row, top row first, left justified.
    """
    k: int
    n: int
    rows: Tuple[str, ...]

    def __post_init__(self):
        rows = tuple(self.rows)
        object.__setattr__(self, "rows", rows)
        if len(rows) != self.k:
            raise InputFormatError(f"expected {self.k} rows, got {len(rows)}")
        for row in rows:
            if any(ch not in (PLUS, ZERO) for ch in row):
                raise InputFormatError(f"row {row!r} may only contain '+' and '0'")
        lengths = [len(row) for row in rows]
        if any(a < b for a, b in zip(lengths, lengths[1:])):
            raise InputFormatError(f"row lengths {lengths} are not weakly decreasing")
        if lengths and lengths[0] > self.n - self.k:
            raise InputFormatError(f"row length {lengths[0]} exceeds n-k = {self.n - self.k}")

    @classmethod
    def parse(cls, text: str, n: Optional[int] = None) -> "LeDiagram":
        """
        Parse rows separated by newlines or '/'.

        Args:
            text: E.g. "++/+0" or "++\\n+0".
            n: Total number of labels; defaults to k plus the top row length.
        """
        rows = [row.strip() for row in text.replace("/", "\n").strip().splitlines()]
        rows = [row for row in rows if row]
        if not rows:
            raise InputFormatError("empty Le-diagram")
        k = len(rows)
        return cls(k=k, n=n if n is not None else k + len(rows[0]), rows=tuple(rows))

    @classmethod
    def all_plus(cls, k: int, n: int) -> "LeDiagram":
        return cls(k=k, n=n, rows=tuple(PLUS * (n - k) for _ in range(k)))

    def to_text(self, separator: str = "\n") -> str:
        return separator.join(self.rows)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(len(row) for row in self.rows)

    @property
    def dimension(self) -> int:
        return sum(row.count(PLUS) for row in self.rows)

    def is_plus(self, r: int, c: int) -> bool:
        """Entry of box (r, c), 1-based, row r from the top."""
        return self.rows[r - 1][c - 1] == PLUS

    def boxes(self) -> List[Tuple[int, int]]:
        return [(r, c) for r in range(1, self.k + 1) for c in range(1, len(self.rows[r - 1]) + 1)]

    def column_height(self, c: int) -> int:
        return sum(1 for length in self.shape if length >= c)

    def satisfies_le_property(self) -> bool:
        """No 0 has a + above it in its column and a + to its left in its row."""
        for r, c in self.boxes():
            if self.is_plus(r, c):
                continue
            above = any(self.is_plus(r2, c) for r2 in range(1, r))
            left = PLUS in self.rows[r - 1][: c - 1]
            if above and left:
                return False
        return True

    def is_irreducible(self) -> bool:
        if self.shape[0] != self.n - self.k or self.shape[-1] == 0:
            return False
        if any(PLUS not in row for row in self.rows):
            return False
        return all(
            any(self.is_plus(r, c) for r in range(1, self.column_height(c) + 1))
            for c in range(1, self.n - self.k + 1)
        )

    @cached_property
    def border_labels(self) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        """
        Labels on the south-east border, numbered 1..n from the north-east
        corner. Returns (east labels per row, south labels per column).
        """
        return border_labels(self.shape, self.k, self.n)


def border_labels(shape: Sequence[int], k: int, n: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    row_labels = [0] * k
    col_labels = [0] * (n - k)
    x, y = n - k, 0
    for label in range(1, n + 1):
        if y < k and shape[y] == x:
            row_labels[y] = label
            y += 1
        else:
            col_labels[x - 1] = label
            x -= 1
    return tuple(row_labels), tuple(col_labels)


def trace_pipes(diagram: LeDiagram) -> Dict[int, Tuple[str, int]]:
    """
    Follow the pipe dream of a Le-diagram.

    A + is an elbow (south joins west, east joins north) and a 0 is a cross.
    Pipes start on the south-east border and travel north and west.

    Returns:
        Dict[int, Tuple[str, int]]: For every start label, the exit as
        ("W", row) or ("N", column).
    """
    row_labels, col_labels = diagram.border_labels
    exits: Dict[int, Tuple[str, int]] = {}

    def follow(r: int, c: int, heading: str) -> Tuple[str, int]:
        while True:
            if c == 0:
                return "W", r
            if r == 0:
                return "N", c
            if diagram.is_plus(r, c):
                heading = "N" if heading == "W" else "W"
            if heading == "W":
                c -= 1
            else:
                r -= 1

    for r, label in enumerate(row_labels, start=1):
        exits[label] = follow(r, diagram.shape[r - 1], "W")
    for c, label in enumerate(col_labels, start=1):
        exits[label] = follow(diagram.column_height(c), c, "N")
    return exits


def derangement_of(diagram: LeDiagram) -> Derangement:
    """
    Permutation read off the pipe dream: the pipe starting at label i and
    ending opposite the border label j gives pi(j) = i.

    Raises:
        NotIrreducible: If the diagram has a fixed point.
    """
    row_labels, col_labels = diagram.border_labels
    pi = [0] * diagram.n
    for label, (side, index) in trace_pipes(diagram).items():
        target = row_labels[index - 1] if side == "W" else col_labels[index - 1]
        pi[target - 1] = label
    try:
        return Derangement(tuple(pi))
    except InputFormatError as e:
        raise NotIrreducible(f"Le-diagram {diagram.to_text('/')!r} has a fixed point") from e


def lediagram_from_derangement(derangement: Derangement, k: int, n: int) -> LeDiagram:
    """
    Find the irreducible Le-diagram whose pipe dream realises ``derangement``.

    The shape is fixed by the excedance positions. Boxes are filled in
    reverse row-major order; every placement completes the two pipes
    leaving the box, so exits and reachability are checked immediately,
    together with the Le-property for each new +.

    Raises:
        NotFound: If no filling matches.
    """
    if derangement.n != n or derangement.k != k:
        raise NotFound(
            f"{list(derangement.pi)} does not have {k} excedances in [{n}]",
            {"k": derangement.k, "n": derangement.n},
        )
    shape = shape_from_pivots(derangement.excedance_positions, k, n)
    if shape[-1] == 0:
        raise NotFound("shape has an empty row")
    row_labels, col_labels = border_labels(shape, k, n)

    # Where each pipe label has to leave the diagram
    target: Dict[int, Tuple[str, int]] = {}
    for r, label in enumerate(row_labels, start=1):
        target[derangement(label)] = ("W", r)
    for c, label in enumerate(col_labels, start=1):
        target[derangement(label)] = ("N", c)

    height = [sum(1 for length in shape if length >= c) for c in range(1, n - k + 2)]
    grid = [[None] * (n - k + 2) for _ in range(k + 2)]
    east_in = [[0] * (n - k + 2) for _ in range(k + 2)]
    south_in = [[0] * (n - k + 2) for _ in range(k + 2)]
    for r in range(1, k + 1):
        east_in[r][shape[r - 1]] = row_labels[r - 1]
    for c in range(1, n - k + 1):
        south_in[height[c - 1]][c] = col_labels[c - 1]

    order = [(r, c) for r in range(k, 0, -1) for c in range(shape[r - 1], 0, -1)]
    visited = 0

    def reachable(label: int, r: int, c: int, heading: str) -> bool:
        side, index = target[label]
        if heading == "W":
            if c == 0:
                return side == "W" and index == r
            return index <= r if side == "W" else index <= c
        if r == 0:
            return side == "N" and index == c
        return index <= r if side == "W" else index <= c

    def le_violation(r0: int, c0: int) -> bool:
        for r in range(r0 + 1, k + 1):
            if shape[r - 1] >= c0 and grid[r][c0] == ZERO and PLUS in grid[r][1:c0]:
                return True
        return False

    def search(position: int) -> bool:
        nonlocal visited
        visited += 1
        if position == len(order):
            return all(
                any(grid[r][c] == PLUS for r in range(1, height[c - 1] + 1))
                for c in range(1, n - k + 1)
            )
        r, c = order[position]
        for tile in (PLUS, ZERO):
            if tile == PLUS and le_violation(r, c):
                continue
            grid[r][c] = tile
            if c == 1 and PLUS not in grid[r][1:shape[r - 1] + 1]:
                continue
            west_out, north_out = (south_in[r][c], east_in[r][c]) if tile == PLUS else (east_in[r][c], south_in[r][c])
            if not reachable(west_out, r, c - 1, "W") or not reachable(north_out, r - 1, c, "N"):
                continue
            east_in[r][c - 1] = west_out
            south_in[r - 1][c] = north_out
            if search(position + 1):
                return True
        grid[r][c] = None
        return False

    found = search(0)
    logger.debug(f"Le-diagram search for {list(derangement.pi)} visited {visited} nodes")
    if not found:
        raise NotFound(f"no Le-diagram realises {list(derangement.pi)}", {"pi": list(derangement.pi)})

    rows = tuple("".join(grid[r][c] for c in range(1, shape[r - 1] + 1)) for r in range(1, k + 1))
    diagram = LeDiagram(k=k, n=n, rows=rows)
    if derangement_of(diagram) != derangement:
        raise NotFound(f"search produced an inconsistent diagram for {list(derangement.pi)}")
    return diagram


def enumerate_le_diagrams(k: int, n: int) -> List[LeDiagram]:
    """All irreducible Le-diagrams in the k x (n-k) rectangle."""
    if not 1 <= k < n:
        return []
    width = n - k
    result = []
    for shape in _shapes(k, width):
        cells = sum(shape)
        for bits in product((ZERO, PLUS), repeat=cells):
            rows, start = [], 0
            for length in shape:
                rows.append("".join(bits[start:start + length]))
                start += length
            diagram = LeDiagram(k=k, n=n, rows=tuple(rows))
            if diagram.is_irreducible() and diagram.satisfies_le_property():
                result.append(diagram)
    logger.debug(f"enumerated {len(result)} Le-diagrams for Gr({k},{n})")
    return result


def _shapes(k: int, width: int) -> Iterable[Tuple[int, ...]]:
    """Partitions with first part ``width`` and k positive parts."""
    def extend(prefix: Tuple[int, ...]):
        if len(prefix) == k:
            yield prefix
            return
        for part in range(prefix[-1], 0, -1):
            yield from extend(prefix + (part,))
    if k == 0 or width == 0:
        return
    yield from extend((width,))


def gale_dominates(subset: Iterable[int], lower: Iterable[int], r: int, n: int) -> bool:
    """True iff ``subset`` is at least ``lower`` in the r-shifted Gale order."""
    key = shifted_key(r, n)
    a = sorted(key(j) for j in subset)
    b = sorted(key(j) for j in lower)
    return len(a) == len(b) and all(x >= y for x, y in zip(a, b))


class PositroidData:
    """
    A positroid cell given by its necklace and derangement.

    The Le-diagram and the list of bases are derived on first use.
    """

    def __init__(self, necklace: GrassmannNecklace, derangement: Optional[Derangement] = None):
        self.necklace = necklace
        self.derangement = derangement if derangement is not None else derangement_from_necklace(necklace)
        if necklace_from_derangement(self.derangement) != necklace:
            raise NotANecklace("necklace and derangement describe different cells")

    @classmethod
    def from_derangement(cls, derangement: Derangement) -> "PositroidData":
        return cls(necklace_from_derangement(derangement), derangement)

    @classmethod
    def from_matroid(cls, matroid: PositroidMatroid) -> "PositroidData":
        return cls(necklace_from_matroid(matroid))

    @classmethod
    def from_le_diagram(cls, diagram: LeDiagram) -> "PositroidData":
        data = cls.from_derangement(derangement_of(diagram))
        data.__dict__["le_diagram"] = diagram
        return data

    @property
    def k(self) -> int:
        return self.necklace.k

    @property
    def n(self) -> int:
        return self.necklace.n

    @cached_property
    def le_diagram(self) -> LeDiagram:
        return lediagram_from_derangement(self.derangement, self.k, self.n)

    @property
    def is_tp_schubert(self) -> bool:
        return is_tp_schubert(self.derangement)

    def bases(self) -> List[Subset]:
        """Bases of the positroid: J with J >= I_r in the r-shifted Gale order for all r."""
        return [
            subset
            for subset in combinations(range(1, self.n + 1), self.k)
            if all(gale_dominates(subset, self.necklace.term(r), r, self.n) for r in range(1, self.n + 1))
        ]

    def matroid(self) -> PositroidMatroid:
        return PositroidMatroid(k=self.k, n=self.n, bases=frozenset(self.bases()))

    def __repr__(self) -> str:
        return f"PositroidData(pi={list(self.derangement.pi)})"


def le_network(diagram: LeDiagram) -> nx.DiGraph:
    """
    Directed network of a Le-diagram.

    Every + is a vertex. Edges run west along rows from the east border to
    each + in turn and south along columns from each + to the next one, and
    finally to the south border.
    """
    row_labels, col_labels = diagram.border_labels
    network = nx.DiGraph()
    for r, label in enumerate(row_labels, start=1):
        network.add_node(("source", label))
        previous = ("source", label)
        for c in range(diagram.shape[r - 1], 0, -1):
            if diagram.is_plus(r, c):
                network.add_edge(previous, ("box", r, c))
                previous = ("box", r, c)
    for c, label in enumerate(col_labels, start=1):
        network.add_node(("sink", label))
        previous = None
        for r in range(1, diagram.column_height(c) + 1):
            if diagram.is_plus(r, c):
                if previous is not None:
                    network.add_edge(previous, ("box", r, c))
                previous = ("box", r, c)
        if previous is not None:
            network.add_edge(previous, ("sink", label))
    return network


def network_point(diagram: LeDiagram, weights: Dict[Tuple[Any, Any], float]) -> GrassmannPoint:
    """
    Boundary measurement matrix of a weighted Le-network.

    Entry (r, j) is the weighted path count from source i_r to sink j,
    signed by (-1) to the number of sources strictly between i_r and j.
    The identity sits in the source columns.
    """
    network = le_network(diagram)
    sources = diagram.border_labels[0]
    order = list(nx.topological_sort(network))
    matrix = np.zeros((diagram.k, diagram.n))
    for r, source in enumerate(sources):
        flow = {("source", source): 1.0}
        for node in order:
            amount = flow.get(node)
            if not amount:
                continue
            for succ in network.successors(node):
                flow[succ] = flow.get(succ, 0.0) + amount * weights[(node, succ)]
        matrix[r, source - 1] = 1.0
        for node, amount in flow.items():
            if node[0] == "sink":
                j = node[1]
                between = sum(1 for i in sources if min(source, j) < i < max(source, j))
                matrix[r, j - 1] = (-1) ** between * amount
    return GrassmannPoint(matrix)


def point_in_cell(diagram: LeDiagram, rng: Optional[np.random.Generator] = None) -> GrassmannPoint:
    """
    Random point of the positroid cell of a Le-diagram.

    Edge weights of the Le-network are drawn from U(0.5, 2).

    Args:
        diagram: An irreducible Le-diagram.
        rng: Random generator (a fresh default generator if omitted).

    Returns:
        GrassmannPoint: A k x n matrix with identity columns at the sources.
    """
    rng = rng if rng is not None else np.random.default_rng()
    weights = {edge: float(rng.uniform(0.5, 2.0)) for edge in sorted(le_network(diagram).edges())}
    return network_point(diagram, weights)


def random_tp_point(k: int, n: int, rng: Optional[np.random.Generator] = None) -> GrassmannPoint:
    """Random totally positive point of Gr(k, n)."""
    return point_in_cell(LeDiagram.all_plus(k, n), rng)
