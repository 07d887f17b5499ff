"""
Tests for polygon triangulations and their soliton graphs.
"""

import math
from itertools import combinations
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

from core.errors import InputFormatError, NotADiagonal, NotFound
from core.grassmann import GrassmannPoint, Positivity, classify, validate_kappa
from core.plabic_graph import from_edge_list, label, reduced_heuristic, trip_permutation
from core.positroid import random_tp_point
from core.triangulation import (
    Triangulation,
    cluster_pluecker,
    enumerate_triangulations,
    exchange_check,
    flip,
    flip_graph,
    point_from_cluster,
    psi,
    realize,
)


class TestTriangulation:
    """Test cases for the Triangulation type and flips."""

    def test_parse(self):
        """Test "i-j" lists (expected use case)."""
        t = Triangulation.parse(5, "1-3, 4-1")
        assert t.key() == ((1, 3), (1, 4))
        assert t.to_dict() == {"n": 5, "diagonals": [[1, 3], [1, 4]]}
        assert t.triangles == ((1, 2, 3), (1, 3, 4), (1, 4, 5))

    def test_parse_rejects_garbage(self):
        """Test malformed diagonals (failure case)."""
        with pytest.raises(InputFormatError):
            Triangulation.parse(5, "1-3,14")

    def test_rejects_crossing(self):
        """Test crossing diagonals are not a triangulation (failure case)."""
        with pytest.raises(InputFormatError):
            Triangulation.from_chords(5, [(1, 3), (2, 4)])

    def test_rejects_polygon_side(self):
        """Test a side of the polygon is not a diagonal (failure case)."""
        with pytest.raises(InputFormatError):
            Triangulation.from_chords(4, [(1, 4)])

    def test_rejects_wrong_count(self):
        """Test n - 3 diagonals are required (failure case)."""
        with pytest.raises(InputFormatError):
            Triangulation.from_chords(6, [(1, 3), (1, 4)])

    def test_flip(self):
        """Test a flip swaps the diagonal of a quadrilateral (expected use case)."""
        t = Triangulation.parse(5, "1-3,1-4")
        assert flip(t, (1, 3)).key() == ((1, 4), (2, 4))
        assert flip(flip(t, (3, 1)), (2, 4)) == t

    def test_flip_square(self):
        """Test the square has two triangulations related by one flip (edge case)."""
        t = Triangulation.parse(4, "1-3")
        assert flip(t, (1, 3)).key() == ((2, 4),)

    def test_flip_missing_diagonal(self):
        """Test flipping a chord that is not in T (failure case)."""
        t = Triangulation.parse(5, "1-3,1-4")
        with pytest.raises(NotADiagonal) as info:
            flip(t, (2, 4))
        assert info.value.details == {"diagonal": [2, 4]}


class TestEnumeration:
    """Test cases for enumerating triangulations and the flip graph."""

    @pytest.mark.parametrize("n, count", [(3, 1), (4, 2), (5, 5), (6, 14), (7, 42)])
    def test_catalan(self, n, count):
        """Test the count is the Catalan number C_{n-2} (expected use case)."""
        assert len(enumerate_triangulations(n)) == count

    def test_flip_graph_pentagon(self):
        """Test the pentagon's flip graph is a 5-cycle (expected use case)."""
        graph = flip_graph(5)
        assert graph.number_of_nodes() == 5
        assert all(degree == 2 for _, degree in graph.degree())

    def test_flip_graph_hexagon(self):
        """Test every hexagon triangulation has three flips (expected use case)."""
        graph = flip_graph(6)
        assert graph.number_of_nodes() == 14
        assert graph.number_of_edges() == 21
        assert all(degree == 3 for _, degree in graph.degree())


class TestPsi:
    """Test cases for the soliton graph of a triangulation."""

    def test_square(self):
        """Test psi of the square triangulated by 1-3 (expected use case)."""
        g = psi(Triangulation.parse(4, "1-3"))
        assert trip_permutation(g) == (3, 4, 1, 2)
        labeling = label(g)
        assert set(labeling.unbounded_labels()) == {(1, 2), (2, 3), (3, 4), (1, 4)}
        bounded = [
            labels for face, labels in labeling.region_labels.items()
            if face not in labeling.boundary_regions
        ]
        assert bounded == [frozenset({1, 3})]

    def test_hexagon_trips(self):
        """Test psi(T) always has the TP derangement of Gr(2,6) (expected use case)."""
        for t in enumerate_triangulations(6):
            assert trip_permutation(psi(t)) == (5, 6, 1, 2, 3, 4)

    def test_fan_is_resolved(self):
        """Test the fan triangulation splits its degree five corner (edge case)."""
        g = psi(Triangulation.parse(6, "1-3,1-4,1-5"))
        internal = [v for v in g.graph.nodes if g.label_of(v) is None]
        assert all(len(g.rotation[v]) == 3 for v in internal)
        assert trip_permutation(g) == (5, 6, 1, 2, 3, 4)

    def test_bounded_labels_are_diagonals(self):
        """Test bounded regions carry the diagonals as 2-subsets (expected use case)."""
        t = Triangulation.parse(6, "1-3,3-5,1-5")
        labeling = label(psi(t))
        bounded = {
            tuple(sorted(labels)) for face, labels in labeling.region_labels.items()
            if face not in labeling.boundary_regions
        }
        assert bounded == set(t.diagonals)

    def test_hexagon_graphs_pass_reducedness(self):
        """Test every psi(T) of the hexagon passes the reducedness conditions (expected use case)."""
        triangulations = enumerate_triangulations(6)
        assert len(triangulations) == 14
        for t in triangulations:
            result = reduced_heuristic(psi(t))
            assert result.passed, (t.key(), result.reason)

    def test_bigon_fails_reducedness(self):
        """Test two white vertices joined by a double edge leave a closed trip (failure case)."""
        # Boundary 1 at the far left, 2 at the far right, the bigon in between
        colors = {1: "boundary", 2: "boundary", 3: "white", 4: "white"}
        edges = {1: (1, 3), 2: (3, 4), 3: (3, 4), 4: (4, 2)}
        rotation = {1: [1], 2: [4], 3: [2, 1, 3], 4: [4, 2, 3]}
        g = from_edge_list(colors, rotation, edges, [(1, 1), (2, 2)])
        assert trip_permutation(g) == (2, 1)
        result = reduced_heuristic(g)
        assert not result.passed
        assert result.reason == "closed trip"


class TestCluster:
    """Test cases for exchange relations and cluster coordinates."""

    def test_exchange_check(self, tp_gr24):
        """Test the three-term relation on a TP point (expected use case)."""
        assert exchange_check(tp_gr24, (1, 2, 3, 4))

    def test_exchange_check_bad_quad(self, tp_gr24):
        """Test the quad must be increasing (failure case)."""
        with pytest.raises(ValueError):
            exchange_check(tp_gr24, (1, 3, 2, 4))

    def test_exchange_check_needs_k2(self):
        """Test only Gr(2, n) is accepted (failure case)."""
        point = GrassmannPoint.from_rows([[1, 1, 1, 1]])
        with pytest.raises(ValueError):
            exchange_check(point, (1, 2, 3, 4))

    def test_exchange_check_random_gr26(self):
        """Test the three-term relation on every quad of 100 random TP points of Gr(2,6) (expected use case)."""
        rng = np.random.default_rng(3)
        for _ in range(100):
            point = random_tp_point(2, 6, rng)
            for quad in combinations(range(1, 7), 4):
                assert exchange_check(point, quad), quad

    def test_cluster_pluecker(self):
        """Test every Plücker coordinate follows from a pentagon cluster (expected use case)."""
        t = Triangulation.parse(5, "1-3,1-4")
        values = {chord: 1.0 for chord in list(t.polygon_edges) + list(t.diagonals)}
        pluecker = cluster_pluecker(t, values)
        assert len(pluecker) == 10
        assert pluecker[(2, 4)] == pytest.approx(2.0)
        assert pluecker[(3, 5)] == pytest.approx(2.0)
        assert pluecker[(2, 5)] == pytest.approx(3.0)

    def test_cluster_rejects_missing_value(self):
        """Test every diagonal and side needs a positive value (failure case)."""
        t = Triangulation.parse(4, "1-3")
        values = {chord: 1.0 for chord in t.polygon_edges}
        with pytest.raises(InputFormatError):
            cluster_pluecker(t, values)
        values[(1, 3)] = -1.0
        with pytest.raises(InputFormatError):
            cluster_pluecker(t, values)

    def test_point_from_cluster(self):
        """Test the matrix reproduces the cluster Plücker vector (expected use case)."""
        t = Triangulation.parse(5, "1-3,1-4")
        values = {chord: 1.0 for chord in t.polygon_edges}
        values.update({chord: math.e for chord in t.diagonals})
        point = point_from_cluster(t, values)
        positivity, _ = classify(point)
        assert positivity == Positivity.TP
        expected = cluster_pluecker(t, values)
        for subset, value in expected.items():
            assert point.pluecker[subset] == pytest.approx(value)


class TestRealize:
    """Test cases for the realisation search, with the soliton pipeline mocked."""

    def setup_method(self):
        """Set up test fixtures."""
        self.t = Triangulation.parse(4, "1-3")
        self.kappa = validate_kappa([-3.0, -1.0, 0.5, 2.0], 2)

    def _patched(self, matches):
        plot = MagicMock(generic=True)
        return [
            patch("core.triangulation.tropical_field", return_value=MagicMock()),
            patch("core.triangulation.contour_plot", return_value=plot),
            patch("core.triangulation.soliton_graph", return_value=MagicMock()),
            patch("core.triangulation.plabic_from_soliton_graph", return_value=MagicMock()),
            patch("core.triangulation.contract_monochrome", side_effect=lambda g: g),
            patch("core.triangulation.is_label_isomorphic", side_effect=matches),
        ]

    def test_first_match_wins(self):
        """Test the search stops at the first matching time (expected use case)."""
        patches = self._patched([False, True])
        for p in patches:
            p.start()
        try:
            result = realize(self.t, self.kappa, times=[-5.0, -3.0, 0.0], log_scales=[1.0])
        finally:
            for p in patches:
                p.stop()
        assert result.time == -3.0
        assert result.log_scale == 1.0
        assert result.point.pluecker[(1, 3)] == pytest.approx(math.e)

    def test_not_found(self):
        """Test an exhausted search raises NotFound (failure case)."""
        patches = self._patched(lambda a, b: False)
        for p in patches:
            p.start()
        try:
            with pytest.raises(NotFound) as info:
                realize(self.t, self.kappa, times=[-1.0], log_scales=[1.0, 2.0])
        finally:
            for p in patches:
                p.stop()
        assert info.value.details == {"diagonals": [[1, 3]]}
