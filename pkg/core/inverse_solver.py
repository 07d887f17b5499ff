"""
Inverse problem: recover a Grassmannian point from a contour plot and its time.

Every edge of a contour plot is a line-soliton whose position fixes the
ratio of the Plücker coordinates on its two sides. The ratios are
collected into a linear system for the log-Plücker coordinates, solved by
least squares and turned into a matrix, either directly from the chamber
minors of the lexicographically first basis or by a bounded numeric fit
over the Le-network weights of the cell.
"""

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
from scipy.optimize import least_squares

import config
from core.errors import (
    Disconnected,
    InconsistentCycle,
    InputFormatError,
    InsufficientLabels,
    MalformedPlot,
    NoConvergence,
    RankDeficient,
)
from core.grassmann import GrassmannPoint, KappaParams, Subset, parse_subset_key, subset_key
from core.positroid import Derangement, PositroidData, le_network, network_point
from core.soliton_engine import ContourPlot, contour_plot, read_derangement, tropical_field

# Configure logging
logger = logging.getLogger(__name__)

Point2 = Tuple[float, float]


@dataclass(frozen=True)
class ObservedEdge:
    """One observed line-soliton: its type, the labels on its two sides and a point on it."""
    type: Tuple[int, int]
    bases: Tuple[Subset, Subset]
    point: Point2
    length: float = 1.0


@dataclass
class ObservedContour:
    """What the inverse problem is given: a time and the labelled edges of a plot."""
    time: float
    edges: List[ObservedEdge]
    reference: Optional[Subset] = None

    def __post_init__(self):
        for index, edge in enumerate(self.edges):
            a, b = set(edge.bases[0]), set(edge.bases[1])
            if len(a) != len(b) or len(a - b) != 1:
                raise InputFormatError(
                    f"edge {index}: labels {sorted(a)} and {sorted(b)} must differ in one element",
                    {"edge": index},
                )

    @property
    def region_labels(self) -> List[Subset]:
        return sorted({basis for edge in self.edges for basis in edge.bases})

    def adjacency(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(self.region_labels)
        for index, edge in enumerate(self.edges):
            graph.add_edge(edge.bases[0], edge.bases[1], index=index)
        return graph

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ObservedContour":
        """Read the plot JSON written by ``kp plot``."""
        try:
            edges = []
            for entry in data["edges"]:
                p0, p1 = entry["p0"], entry["p1"]
                bases = tuple(_parse_basis(b) for b in entry["bases"])
                edges.append(ObservedEdge(
                    type=tuple(int(i) for i in entry["type"]),
                    bases=bases,
                    point=((p0[0] + p1[0]) / 2, (p0[1] + p1[1]) / 2),
                    length=math.hypot(p1[0] - p0[0], p1[1] - p0[1]),
                ))
            time = float(data["time"])
        except (KeyError, TypeError, ValueError, IndexError) as e:
            raise InputFormatError(f"Malformed plot JSON: {e}") from e
        return cls(time=time, edges=edges)


def _parse_basis(value: Union[str, Sequence[int]]) -> Subset:
    if isinstance(value, str):
        return parse_subset_key(value)
    return tuple(sorted(int(i) for i in value))


def observed_from_plot(plot: Union[ContourPlot, Dict[str, Any]]) -> ObservedContour:
    """ObservedContour with edge midpoints and lengths of a computed plot or its JSON."""
    if isinstance(plot, dict):
        return ObservedContour.from_dict(plot)
    edges = []
    for edge in plot.edges:
        (x0, y0), (x1, y1) = edge.p0, edge.p1
        edges.append(ObservedEdge(
            type=edge.type,
            bases=edge.bases,
            point=((x0 + x1) / 2, (y0 + y1) / 2),
            length=math.hypot(x1 - x0, y1 - y0),
        ))
    return ObservedContour(time=plot.time, edges=edges, reference=plot.field.left_basis())


def _log_k(kappa: KappaParams, subset: Subset) -> float:
    values = [kappa.value(i) for i in subset]
    return sum(math.log(values[m] - values[l]) for l, m in combinations(range(len(values)), 2))


@dataclass
class LogPlueckerSystem:
    """ln D_I - ln D_J = rhs, one equation per observed edge."""
    labels: List[Subset]
    equations: List[Tuple[Subset, Subset, float, float]]  # I, J, rhs, weight
    reference: Subset
    graph: nx.Graph = field(repr=False, default_factory=nx.Graph)

    def ratio(self, first: Subset, second: Subset) -> Optional[float]:
        for a, b, rhs, _ in self.equations:
            if (a, b) == (first, second):
                return rhs
            if (a, b) == (second, first):
                return -rhs
        return None


def offsets_to_ratios(
    oc: ObservedContour,
    kappa: KappaParams,
    cycle_tol: Optional[float] = None,
) -> LogPlueckerSystem:
    """
    Turn every edge position into a log-Plücker difference.

    For an [i, j] edge between I = P+{i} and J = P+{j} through (x, y) at time t:
    ln D_I - ln D_J = (k_j-k_i)(x + (k_i+k_j) y + (k_i^2+k_i k_j+k_j^2) t) - ln K_I + ln K_J.

    Raises:
        InconsistentCycle: If the differences do not close up around a cycle.
    """
    cycle_tol = config.INVERSE["cycle_tol"] if cycle_tol is None else cycle_tol
    longest = max((edge.length for edge in oc.edges), default=1.0) or 1.0

    equations = []
    for edge in oc.edges:
        first, second = edge.bases
        (i,) = set(first) - set(second)
        (j,) = set(second) - set(first)
        ki, kj = kappa.value(i), kappa.value(j)
        x, y = edge.point
        rhs = (kj - ki) * (x + (ki + kj) * y + (ki * ki + ki * kj + kj * kj) * oc.time)
        rhs += _log_k(kappa, second) - _log_k(kappa, first)
        weight = max(edge.length / longest, 1e-3)
        equations.append((first, second, rhs, weight))

    labels = oc.region_labels
    reference = oc.reference
    if reference is None:
        reference = min(labels, key=lambda s: sum(kappa.value(i) for i in s))
    graph = oc.adjacency()
    system = LogPlueckerSystem(labels=labels, equations=equations, reference=reference, graph=graph)
    _check_cycles(system, cycle_tol)
    logger.debug(f"{len(equations)} ratio equations on {len(labels)} labels")
    return system


def _check_cycles(system: LogPlueckerSystem, cycle_tol: float):
    offsets: Dict[Tuple[Subset, Subset], float] = {}
    for a, b, rhs, _ in system.equations:
        offsets[(a, b)] = rhs
        offsets[(b, a)] = -rhs

    potential: Dict[Subset, float] = {}
    for component in nx.connected_components(system.graph):
        root = system.reference if system.reference in component else min(component)
        potential[root] = 0.0
        for parent, child in nx.bfs_edges(system.graph, root):
            potential[child] = potential[parent] - offsets[(parent, child)]

    for index, (a, b, rhs, _) in enumerate(system.equations):
        residual = potential[a] - potential[b] - rhs
        scale = 1.0 + abs(rhs) + abs(potential[a]) + abs(potential[b])
        if abs(residual) > cycle_tol * scale:
            raise InconsistentCycle(
                f"ratio equations around {list(a)} / {list(b)} miss by {residual:.3g}",
                {"edge": index, "residual": residual},
            )


@dataclass
class LogSolution:
    """Normalised log-Plücker values (reference label at 0) and the fit residual."""
    logs: Dict[Subset, float]
    residual: float
    rank: int
    reference: Subset


def solve_logs(system: LogPlueckerSystem) -> LogSolution:
    """
    Weighted least squares on the edge-difference graph with the reference
    label pinned to zero.

    Raises:
        Disconnected: If the region adjacency graph has several components.
        RankDeficient: If the system does not determine the differences.
    """
    if system.graph.number_of_nodes() and not nx.is_connected(system.graph):
        components = [sorted(c) for c in nx.connected_components(system.graph)]
        raise Disconnected(
            f"region adjacency graph has {len(components)} components",
            {"components": [[list(s) for s in c] for c in components]},
        )
    unknowns = [label for label in system.labels if label != system.reference]
    column = {label: index for index, label in enumerate(unknowns)}
    if not unknowns:
        return LogSolution(logs={system.reference: 0.0}, residual=0.0, rank=0, reference=system.reference)

    matrix = np.zeros((len(system.equations), len(unknowns)))
    rhs = np.zeros(len(system.equations))
    weights = np.zeros(len(system.equations))
    for row, (a, b, value, weight) in enumerate(system.equations):
        if a in column:
            matrix[row, column[a]] += 1.0
        if b in column:
            matrix[row, column[b]] -= 1.0
        rhs[row] = value
        weights[row] = math.sqrt(weight)

    solution, _, rank, _ = np.linalg.lstsq(matrix * weights[:, None], rhs * weights, rcond=None)
    if rank < len(unknowns):
        raise RankDeficient(f"log system has rank {rank}, expected {len(unknowns)}", {"rank": int(rank)})
    residual = float(np.max(np.abs(matrix @ solution - rhs))) if len(rhs) else 0.0
    logs = {system.reference: 0.0}
    logs.update({label: float(solution[column[label]]) for label in unknowns})
    logger.debug(f"solved {len(unknowns)} log-Plücker values, residual {residual:.3g}")
    return LogSolution(logs=logs, residual=residual, rank=int(rank), reference=system.reference)


@dataclass
class ReconstructionReport:
    """The reconstructed point and how it was obtained."""
    point: GrassmannPoint
    tier: str
    residual: float
    jacobian_rank: Optional[int]
    dimension: int
    max_ratio_error: float
    forward_labels_match: Optional[bool] = None
    missing: List[Subset] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "matrix": self.point.to_rows(),
            "tier": self.tier,
            "residual": self.residual,
            "jacobian_rank": self.jacobian_rank,
            "dimension": self.dimension,
            "max_ratio_error": self.max_ratio_error,
            "forward_labels_match": self.forward_labels_match,
            "completed_minors": [subset_key(s) for s in self.missing],
        }


def _relations(k: int, n: int):
    """Three-term relations D_Sac D_Sbd = D_Sab D_Scd + D_Sad D_Sbc, |S| = k-2, as 6-tuples of subsets."""
    if k < 2:
        return []
    result = []
    for rest in combinations(range(1, n + 1), k - 2):
        free = [i for i in range(1, n + 1) if i not in rest]
        for a, b, c, d in combinations(free, 4):
            def key(x, y):
                return tuple(sorted(rest + (x, y)))
            result.append((key(a, c), key(b, d), key(a, b), key(c, d), key(a, d), key(b, c)))
    return result


def complete_pluecker(known: Dict[Subset, float], k: int, n: int) -> Dict[Subset, float]:
    """
    Close a partial Plücker vector under three-term relations.

    A relation with exactly one unknown entry is solved for it whenever the
    entry's partner in its product is nonzero; this repeats until nothing
    changes.
    """
    values = dict(known)
    relations = _relations(k, n)
    tiny = 1e-300
    progress = True
    while progress:
        progress = False
        for l1, l2, r1, r2, r3, r4 in relations:
            terms = (l1, l2, r1, r2, r3, r4)
            unknown = [s for s in terms if s not in values]
            if len(unknown) != 1:
                continue
            (target,) = unknown
            v = values
            if target == l1 and abs(v[l2]) > tiny:
                v[l1] = (v[r1] * v[r2] + v[r3] * v[r4]) / v[l2]
            elif target == l2 and abs(v[l1]) > tiny:
                v[l2] = (v[r1] * v[r2] + v[r3] * v[r4]) / v[l1]
            elif target == r1 and abs(v[r2]) > tiny:
                v[r1] = (v[l1] * v[l2] - v[r3] * v[r4]) / v[r2]
            elif target == r2 and abs(v[r1]) > tiny:
                v[r2] = (v[l1] * v[l2] - v[r3] * v[r4]) / v[r1]
            elif target == r3 and abs(v[r4]) > tiny:
                v[r3] = (v[l1] * v[l2] - v[r1] * v[r2]) / v[r4]
            elif target == r4 and abs(v[r3]) > tiny:
                v[r4] = (v[l1] * v[l2] - v[r1] * v[r2]) / v[r3]
            else:
                continue
            progress = True
    return values


def chamber_matrix(first: Subset, values: Dict[Subset, float], n: int) -> np.ndarray:
    """
    RREF matrix with pivots ``first`` from D_X / D_first for the chamber
    minors X = (first - {p_m}) + {j}: a_{m,j} = (-1)^s D_X / D_first with s
    the number of pivots strictly between p_m and j.
    """
    k = len(first)
    matrix = np.zeros((k, n))
    for m, p in enumerate(first):
        matrix[m, p - 1] = 1.0
        for j in range(1, n + 1):
            if j in first:
                continue
            minor = tuple(sorted((set(first) - {p}) | {j}))
            between = sum(1 for q in first if min(p, j) < q < max(p, j))
            matrix[m, j - 1] = (-1) ** between * values[minor]
    return matrix


def _chamber_minors(first: Subset, n: int) -> List[Subset]:
    return [
        tuple(sorted((set(first) - {p}) | {j}))
        for p in first
        for j in range(1, n + 1)
        if j not in first
    ]


def _ratio_error(point: GrassmannPoint, logs: Dict[Subset, float]) -> float:
    pluecker = point.pluecker
    observed = [s for s in sorted(logs) if abs(pluecker.get(s, 0.0)) > 0]
    if not observed:
        return math.inf
    ref = observed[0]
    return max(
        abs(math.log(abs(pluecker[s] / pluecker[ref])) - (logs[s] - logs[ref]))
        for s in observed
    )


def _numeric(logs: Dict[Subset, float], cell: PositroidData) -> Tuple[GrassmannPoint, float, int]:
    """Best bounded least-squares fit of the Le-network log-weights over the seed list."""
    diagram = cell.le_diagram
    edges = sorted(le_network(diagram).edges())
    bases = set(cell.bases())
    labels = [s for s in sorted(logs) if s in bases]
    if len(labels) < 2:
        raise InsufficientLabels("fewer than two observed labels are bases of the cell", {"labels": len(labels)})
    ref = labels[0]
    targets = np.array([logs[s] - logs[ref] for s in labels[1:]])
    bound = config.INVERSE["bound"]

    def point_of(theta: np.ndarray) -> GrassmannPoint:
        return network_point(diagram, {e: math.exp(w) for e, w in zip(edges, theta)})

    def residuals(theta: np.ndarray) -> np.ndarray:
        matrix = point_of(theta).matrix
        dets = np.array([np.linalg.det(matrix[:, [i - 1 for i in s]]) for s in labels])
        logs_now = np.log(np.maximum(np.abs(dets), 1e-300))
        return logs_now[1:] - logs_now[0] - targets

    best = None
    for seed in config.INVERSE["seeds"]:
        rng = np.random.default_rng(seed)
        x0 = rng.uniform(-1.0, 1.0, size=len(edges))
        result = least_squares(
            residuals, x0, method="trf", bounds=(-bound, bound), max_nfev=config.INVERSE["max_nfev"]
        )
        logger.debug(f"seed {seed}: cost {result.cost:.3g}")
        if best is None or result.cost < best.cost:
            best = result
    jac = best.jac
    rank = int(np.linalg.matrix_rank(jac, tol=1e-8 * max(1.0, float(np.max(np.abs(jac))) if jac.size else 1.0)))
    return point_of(best.x), float(best.cost), rank


def reconstruct_report(
    logs: Dict[Subset, float],
    cell: PositroidData,
    kappa: Optional[KappaParams] = None,
    t: Optional[float] = None,
) -> ReconstructionReport:
    """
    Reconstruct a point from log-Plücker values on the observed labels.

    Tries, in order: the chamber minors of the first necklace term
    ("chamber"); the same after closing the observed values and the zeros
    of the cell under three-term relations ("completion"); a multi-start
    numeric fit over the cell's Le-network ("numeric"). When ``kappa`` and
    ``t`` are given the forward map is re-run and its region labels are
    compared with the observed ones.

    Raises:
        InsufficientLabels: If the observed labels do not pin the point down.
        NoConvergence: If the numeric fit does not reach the target cost.
    """
    first = cell.necklace.term(1)
    dimension = cell.le_diagram.dimension
    bases = set(cell.bases())
    needed = _chamber_minors(first, cell.n)
    missing = [s for s in needed if s not in logs and s in bases]

    point = None
    tier = "numeric"
    jacobian_rank = None
    residual = 0.0
    completed: List[Subset] = []
    if first in logs:
        known = {s: math.exp(v - logs[first]) for s, v in logs.items() if s in bases}
        known.update({s: 0.0 for s in combinations(range(1, cell.n + 1), cell.k) if s not in bases})
        if not missing:
            tier = "chamber"
        else:
            known = complete_pluecker(known, cell.k, cell.n)
            if all(s in known for s in needed):
                tier = "completion"
                completed = missing
        if tier != "numeric":
            point = GrassmannPoint(chamber_matrix(first, known, cell.n))

    if point is None:
        logger.info(f"chamber minors {[subset_key(s) for s in missing]} not observed; fitting numerically")
        point, cost, jacobian_rank = _numeric(logs, cell)
        residual = cost
        if jacobian_rank < dimension:
            raise InsufficientLabels(
                f"observed labels fix {jacobian_rank} of {dimension} parameters",
                {"missing": [subset_key(s) for s in missing], "rank": jacobian_rank, "dimension": dimension},
            )
        if cost > config.INVERSE["cost_tol"] * max(1, len(logs)):
            raise NoConvergence(f"numeric fit stopped at cost {cost:.3g}", {"cost": cost})

    error = _ratio_error(point, logs)
    if error > config.INVERSE["ratio_tol"]:
        logger.warning(f"reconstructed point misses observed ratios by {error:.3g}")

    labels_match = None
    if kappa is not None and t is not None:
        plot = contour_plot(tropical_field(point, kappa), t)
        labels_match = sorted(r.basis for r in plot.regions) == sorted(logs)

    logger.info(f"reconstructed point by {tier} tier, ratio error {error:.3g}")
    return ReconstructionReport(
        point=point,
        tier=tier,
        residual=residual,
        jacobian_rank=jacobian_rank,
        dimension=dimension,
        max_ratio_error=error,
        forward_labels_match=labels_match,
        missing=completed,
    )


def reconstruct(
    logs: Dict[Subset, float],
    cell: PositroidData,
    kappa: Optional[KappaParams] = None,
    t: Optional[float] = None,
) -> GrassmannPoint:
    """The point of ``reconstruct_report``."""
    return reconstruct_report(logs, cell, kappa, t).point


def invert_plot(
    plot: Union[ContourPlot, Dict[str, Any]],
    kappa: KappaParams,
    cell: PositroidData,
) -> ReconstructionReport:
    """Whole pipeline: observed edges, ratio system, log solve, reconstruction."""
    observed = observed_from_plot(plot)
    system = offsets_to_ratios(observed, kappa)
    solution = solve_logs(system)
    report = reconstruct_report(solution.logs, cell, kappa, observed.time)
    report.residual = max(report.residual, solution.residual)
    return report


def derangement_from_plot(plot: Union[ContourPlot, Dict[str, Any]]) -> Derangement:
    """
    Derangement of the cell from the unbounded solitons of a plot or its JSON.

    Raises:
        MalformedPlot: If the solitons do not give k top and n-k bottom rays
            forming a derangement.
    """
    if not isinstance(plot, dict):
        return read_derangement(plot)
    try:
        k, n = int(plot["k"]), int(plot["n"])
        top, bottom = [], []
        for entry in plot["edges"]:
            i, j = (int(v) for v in entry["type"])
            p0, p1 = entry["p0"], entry["p1"]
            v0, v1 = entry.get("v0"), entry.get("v1")
            if v0 is None and v1 is None:
                top.append((i, j))
                bottom.append((i, j))
            elif v0 is None or v1 is None:
                outer, inner = (p0, p1) if v0 is None else (p1, p0)
                (top if outer[1] > inner[1] else bottom).append((i, j))
    except (KeyError, TypeError, ValueError) as e:
        raise InputFormatError(f"Malformed plot JSON: {e}") from e
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
