"""
Tests for the Le-diagram to plabic graph construction.
"""

from itertools import permutations
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

import config

from core.errors import NotIrreducible
from core.grassmann import validate_kappa
from core.le_to_plabic import (
    build_g_minus,
    pipe_grid,
    predict_graph_t_neg,
    prediction_report,
    target_boundary_sequence,
)
from core.plabic_graph import label, trip_permutation
from core.positroid import Derangement, LeDiagram, derangement_of, enumerate_le_diagrams, random_tp_point

# Same-size subset sums differ by at least 0.1 for every prefix
KAPPA6 = [-4.6, -2.3, -0.9, 0.7, 2.2, 4.1]

SMALL_CELLS = [(k, n) for n in range(2, 8) for k in range(1, min(3, n - 1) + 1)]


class TestPipeGrid:
    """Test cases for the pipe dream tiles."""

    def test_tiles(self):
        """Test + becomes an elbow and 0 a cross (expected use case)."""
        grid = pipe_grid(LeDiagram.parse("0+/+"))
        assert grid.tile(1, 1) == "cross"
        assert grid.tile(1, 2) == "elbow"
        data = grid.to_dict()
        assert data["east_labels"] == [1, 3]
        assert data["south_labels"] == [4, 2]


class TestBuildGMinus:
    """Test cases for G_-(L)."""

    def test_single_box(self):
        """Test the diagram "+" gives one boundary-to-boundary edge (edge case)."""
        g = build_g_minus(LeDiagram.parse("+"))
        assert len(g.edges) == 1
        assert trip_permutation(g) == (2, 1)

    def test_all_plus_trips(self):
        """Test trips of the TP cell of Gr(2,4) (expected use case)."""
        g = build_g_minus(LeDiagram.all_plus(2, 4))
        assert trip_permutation(g) == (3, 4, 1, 2)
        assert g.boundary_label_sequence() == [1, 2, 3, 4]
        assert not g.crossings()

    def test_all_plus_regions(self):
        """Test the boundary regions carry the necklace (expected use case)."""
        g = build_g_minus(LeDiagram.all_plus(2, 4))
        regions = label(g).unbounded_labels()
        assert sorted(regions) == [(1, 2), (1, 4), (2, 3), (3, 4)]

    @pytest.mark.parametrize("text", ["++/0+", "0+/+", "++/+", "+0/++"])
    def test_trips_match_pipes(self, text):
        """Test the trip permutation equals the pipe dream permutation (expected use case)."""
        diagram = LeDiagram.parse(text, n=4)
        assert trip_permutation(build_g_minus(diagram)) == derangement_of(diagram).pi

    @pytest.mark.parametrize("k,n", SMALL_CELLS)
    def test_trips_match_pipes_everywhere(self, k, n):
        """Test trips equal pipes on every Le-diagram, one per derangement with k excedances (expected use case)."""
        diagrams = enumerate_le_diagrams(k, n)
        found = set()
        for diagram in diagrams:
            pi = derangement_of(diagram).pi
            assert trip_permutation(build_g_minus(diagram)) == pi, diagram.to_text("/")
            found.add(pi)
        expected = {
            p for p in permutations(range(1, n + 1))
            if all(p[i] != i + 1 for i in range(n)) and sum(p[i] > i + 1 for i in range(n)) == k
        }
        assert len(diagrams) == len(found)
        assert found == expected

    def test_crossing_survives(self):
        """Test a 0 with all four arms becomes an X-crossing (expected use case)."""
        g = build_g_minus(LeDiagram.parse("0+/+"))
        assert len(g.crossings()) == 1
        assert g.boundary_label_sequence() == [1, 3, 2, 4]

    def test_reducible(self):
        """Test a diagram with an empty column is rejected (failure case)."""
        with pytest.raises(NotIrreducible):
            build_g_minus(LeDiagram.parse("+0/+0"))


class TestPrediction:
    """Test cases for the t << 0 prediction."""

    def setup_method(self):
        """Set up test fixtures."""
        self.kappa = validate_kappa([-3, -1, 0.5, 2], 2)

    def test_target_sequence(self):
        """Test top rays then bottom rays by slope (expected use case)."""
        assert target_boundary_sequence(Derangement((3, 4, 1, 2)), self.kappa) == [3, 4, 1, 2]
        assert target_boundary_sequence(Derangement((2, 1, 4, 3)), self.kappa) == [2, 4, 1, 3]

    def test_schubert_cell_needs_no_crossing(self):
        """Test the TP cell prediction is G_-(L) itself (expected use case)."""
        diagram = LeDiagram.all_plus(2, 4)
        predicted = predict_graph_t_neg(diagram, self.kappa)
        assert not predicted.crossings()
        assert trip_permutation(predicted) == (3, 4, 1, 2)

    def test_prediction_keeps_trips(self):
        """Test the predicted graph has the derangement as trip permutation (expected use case)."""
        diagram = LeDiagram.parse("0+/+")
        predicted = predict_graph_t_neg(diagram, self.kappa)
        assert trip_permutation(predicted) == (2, 1, 4, 3)
        sequence = predicted.boundary_label_sequence()
        target = target_boundary_sequence(derangement_of(diagram), self.kappa)
        assert any(target[i:] + target[:i] == sequence for i in range(4))

    def test_wrong_kappa_size(self):
        """Test kappa must match the diagram (failure case)."""
        with pytest.raises(ValueError):
            predict_graph_t_neg(LeDiagram.all_plus(2, 4), validate_kappa([-1, 0, 1], 2))

    @patch("core.le_to_plabic.tropical_field")
    @patch("core.le_to_plabic.auto_negative_time")
    @patch("core.le_to_plabic.plabic_from_soliton_graph")
    def test_report_match(self, mock_plabic, mock_time, mock_field):
        """Test the report when the computed graph equals the prediction (expected use case)."""
        diagram = LeDiagram.all_plus(2, 4)
        mock_time.return_value = (-8.0, MagicMock())
        mock_plabic.return_value = build_g_minus(diagram)

        report = prediction_report(diagram, self.kappa, seed=1)

        assert report.matches
        assert report.time == -8.0
        assert report.mismatches == []
        mock_field.assert_called_once()

    @patch("core.le_to_plabic.tropical_field")
    @patch("core.le_to_plabic.auto_negative_time")
    @patch("core.le_to_plabic.plabic_from_soliton_graph")
    def test_report_mismatch(self, mock_plabic, mock_time, mock_field):
        """Test differences are listed when the graphs disagree (failure case)."""
        mock_time.return_value = (-8.0, MagicMock())
        mock_plabic.return_value = build_g_minus(LeDiagram.parse("0+/+"))

        report = prediction_report(LeDiagram.all_plus(2, 4), self.kappa)

        assert not report.matches
        assert "number of X-crossings differs" in report.mismatches
        assert report.to_dict()["observed_crossings"] == 1

    @pytest.mark.parametrize("k,n", [(k, n) for k, n in SMALL_CELLS if n <= 6])
    def test_tp_prediction_matches_plots(self, monkeypatch, k, n):
        """Test G_-(L) is the computed t << 0 graph at random TP points (expected use case)."""
        # Start well inside the t << 0 regime
        monkeypatch.setitem(config.AUTO_TIME, "start", -16.0)
        diagram = LeDiagram.all_plus(k, n)
        kappa = validate_kappa(KAPPA6[:n], k)
        for seed in range(5):
            point = random_tp_point(k, n, np.random.default_rng(seed))
            report = prediction_report(diagram, kappa, point=point)
            assert report.matches, (seed, report.mismatches)
            assert report.predicted_crossings == 0
