"""
Tests for the bridge handler module.

This module tests the CommandHandler class which runs parsed commands
through the core modules and wraps the results in response models.
"""

import math
from unittest import mock

import numpy as np
import pytest

from bridge.handler import CommandHandler
from bridge.protocol import (
    AsymptoticsCommand,
    CommandType,
    ErrorResponse,
    InvertCommand,
    Le2PlabicCommand,
    NecklaceCommand,
    PlotCommand,
    ResponseStatus,
    TriangulateCommand,
    VerifyCommand,
    canonical_json,
)
from core.errors import NotGeneric
from core.grassmann import GrassmannPoint, validate_kappa
from core.positroid import random_tp_point
from core.soliton_engine import contour_plot, tropical_field

BOX = (-4.0, 4.0, -4.0, 4.0)


class TestCommandHandler:
    """Test cases for the CommandHandler class."""

    def setup_method(self):
        """Set up test environment before each test method."""
        self.handler = CommandHandler()

    def test_dispatch_table(self):
        """Test every command type has a handler (expected use case)."""
        assert set(self.handler.command_handlers) == set(CommandType)

    def test_necklace_from_pi(self):
        """Test the necklace command on the TP derangement of Gr(2,4) (expected use case)."""
        response = self.handler.handle(NecklaceCommand(pi=[3, 4, 1, 2]))
        assert response.status == ResponseStatus.SUCCESS
        assert (response.k, response.n) == (2, 4)
        assert response.necklace == ["12", "23", "34", "14"]
        assert response.le_diagram == "++/++"
        assert response.tp_schubert is True

    def test_necklace_from_matrix(self):
        """Test the necklace command reads the cell of a matrix (expected use case)."""
        response = self.handler.handle(NecklaceCommand(matrix=[[1, 0, -1, -2], [0, 1, 1, 1]]))
        assert response.derangement == [3, 4, 1, 2]

    def test_necklace_not_a_derangement(self):
        """Test a permutation with a fixed point (failure case)."""
        response = self.handler.handle(NecklaceCommand(pi=[1, 3, 2]))
        assert isinstance(response, ErrorResponse)
        assert response.error_type == "InputFormatError"
        assert response.error_code == 2

    def test_asymptotics(self):
        """Test the single soliton of Gr(1,2) (expected use case)."""
        response = self.handler.handle(AsymptoticsCommand(pi=[2, 1], kappa=[-1, 1]))
        assert response.top == [[1, 2]]
        assert response.bottom == [[1, 2]]
        assert response.regions == ["1", "2"]
        assert response.x_negative_label == "1"

    def test_asymptotics_non_generic(self):
        """Test integer kappas with coinciding 4-sums (failure case)."""
        response = self.handler.handle(
            AsymptoticsCommand(pi=[6, 7, 1, 2, 8, 3, 9, 4, 5], kappa=list(range(-4, 5)))
        )
        assert isinstance(response, ErrorResponse)
        assert response.error_type == "NotGeneric"
        assert response.command == CommandType.ASYMPTOTICS

    def test_plot_at_time(self):
        """Test the plot command at a fixed time and box (expected use case)."""
        response = self.handler.handle(PlotCommand(matrix=[[1, 1, 1]], kappa=[-1, 0, 1], time=0.0, bbox=BOX))
        assert response.time == 0.0
        assert response.derangement == [3, 1, 2]
        assert response.plot["generic"] is True
        assert response.soliton_graph is not None

    def test_plot_auto_time(self):
        """Test the plot command picks t << 0 when no time is given (expected use case)."""
        graph = mock.MagicMock()
        graph.plot.to_dict.return_value = {"time": -4.0}
        with mock.patch("bridge.handler.auto_negative_time", return_value=(-4.0, graph)) as auto, \
                mock.patch("bridge.handler.read_derangement") as read, \
                mock.patch("bridge.handler.plabic_from_soliton_graph") as plabic:
            read.return_value.pi = (2, 1)
            plabic.return_value.to_dict.return_value = {"vertices": []}
            response = self.handler.handle(PlotCommand(matrix=[[1, 1]], kappa=[-1, 1]))
        auto.assert_called_once()
        assert response.time == -4.0
        assert response.plot == {"time": -4.0}
        assert response.derangement == [2, 1]

    def test_plot_not_tnn(self):
        """Test a point with minors of both signs (failure case)."""
        response = self.handler.handle(PlotCommand(matrix=[[1, -1]], kappa=[-1, 1], time=0.0))
        assert isinstance(response, ErrorResponse)
        assert response.error_type == "NotTotallyNonnegative"

    def test_le2plabic(self):
        """Test G_- of the all-plus diagram (expected use case)."""
        response = self.handler.handle(Le2PlabicCommand(le="++/++"))
        assert response.trip_permutation == [3, 4, 1, 2]
        assert response.predicted is None
        assert response.prediction is None
        assert "east_labels" in response.pipes

    def test_le2plabic_with_prediction(self):
        """Test the prediction is attached when kappas are given (expected use case)."""
        response = self.handler.handle(Le2PlabicCommand(le="++/++", kappa=[-3.0, -1.0, 0.5, 2.0]))
        assert response.predicted is not None
        assert response.prediction is None

    def test_triangulate_with_flip(self):
        """Test psi of the square after flipping 1-3 into 2-4 (expected use case)."""
        response = self.handler.handle(TriangulateCommand(n=4, diagonals=[(1, 3)], flips=[(1, 3)]))
        assert response.triangulation == {"n": 4, "diagonals": [[2, 4]]}
        assert response.bounded_labels == ["24"]
        assert sorted(response.unbounded_labels) == ["12", "14", "23", "34"]
        assert response.trip_permutation == [3, 4, 1, 2]

    def test_triangulate_bad_flip(self):
        """Test flipping a chord that is not a diagonal (failure case)."""
        response = self.handler.handle(TriangulateCommand(n=4, diagonals=[(1, 3)], flips=[(2, 4)]))
        assert isinstance(response, ErrorResponse)
        assert response.error_type == "NotADiagonal"

    def test_invert(self):
        """Test the point of a Gr(1,2) plot is recovered from its JSON (expected use case)."""
        point = GrassmannPoint.from_rows([[1, math.exp(-1.0)]])
        kappa = validate_kappa([-1, 1], 1)
        data = contour_plot(tropical_field(point, kappa), 0.0, BOX).to_dict()
        response = self.handler.handle(InvertCommand(plot=data))
        assert response.report["tier"] == "chamber"
        assert np.allclose(response.report["matrix"], point.matrix)
        assert response.pluecker["1"] == pytest.approx(1.0)
        assert response.pluecker["2"] == pytest.approx(math.exp(-1.0))

    def test_invert_without_kappa(self):
        """Test plot JSON without kappas and no override (failure case)."""
        response = self.handler.handle(InvertCommand(plot={"k": 1, "n": 2, "time": 0.0, "edges": []}))
        assert isinstance(response, ErrorResponse)
        assert response.error_type == "MalformedPlot"

    def test_verify(self):
        """Test every cross-check passes on Gr(1,3) at t = 0 (expected use case)."""
        response = self.handler.handle(VerifyCommand(matrix=[[1, 1, 1]], kappa=[-1, 0, 1], time=0.0, samples=20))
        assert [c.name for c in response.checks] == [
            "derangement", "necklace", "balancing", "lines", "trip_permutation", "sandwich", "inverse",
        ]
        assert response.passed, [c for c in response.checks if not c.passed]

    def test_domain_error_becomes_response(self):
        """Test a KPError raised inside a handler is wrapped (failure case)."""
        with mock.patch("bridge.handler.predict_asymptotics", side_effect=NotGeneric("tie", {"side": "top"})):
            response = self.handler.handle(AsymptoticsCommand(pi=[2, 1], kappa=[-1, 1]))
        assert isinstance(response, ErrorResponse)
        assert response.details == {"side": "top"}

    def test_other_errors_propagate(self):
        """Test non-domain exceptions are not swallowed (failure case)."""
        with mock.patch("bridge.handler.predict_asymptotics", side_effect=RuntimeError("boom")):
            with pytest.raises(RuntimeError):
                self.handler.handle(AsymptoticsCommand(pi=[2, 1], kappa=[-1, 1]))

    def test_verify_check_crash_is_recorded(self):
        """Test a check raising a plain exception fails alone while the others still run (edge case)."""
        with mock.patch("bridge.handler.sample_sandwich", side_effect=ValueError("boom")):
            response = self.handler.handle(
                VerifyCommand(matrix=[[1, 1, 1]], kappa=[-1, 0, 1], time=0.0, samples=20)
            )
        assert not isinstance(response, ErrorResponse)
        assert len(response.checks) == 7
        failed = [c for c in response.checks if not c.passed]
        assert [c.name for c in failed] == ["sandwich"]
        assert "ValueError" in failed[0].detail
        assert response.passed is False

    def test_seeded_commands_are_reproducible(self):
        """Test a fixed seed gives byte identical output (expected use case)."""
        matrix = random_tp_point(2, 4, np.random.default_rng(1)).to_rows()
        commands = [
            Le2PlabicCommand(le="++/++", kappa=[-3.0, -1.0, 0.5, 2.0], check=True, seed=7),
            VerifyCommand(matrix=matrix, kappa=[-3.0, -1.0, 0.5, 2.0], seed=9, samples=30),
        ]
        for command in commands:
            first = canonical_json(self.handler.handle(command))
            second = canonical_json(CommandHandler().handle(command))
            assert first == second
