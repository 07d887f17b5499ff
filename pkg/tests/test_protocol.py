"""
Tests for the bridge protocol module.

This module tests the command and response models and the canonical JSON
serialisation shared by every subcommand.
"""

import json

import pytest

import config
from bridge.protocol import (
    CheckResult,
    CommandType,
    ErrorResponse,
    NecklaceCommand,
    PlotCommand,
    ResponseStatus,
    TriangulateCommand,
    VerifyCommand,
    VerifyResponse,
    canonical_json,
    create_error_response,
    parse_command,
)
from core.errors import InputFormatError, NotGeneric


class TestProtocolModels:
    """Test cases for the protocol models."""

    def test_plot_command_defaults(self):
        """Test a plot command without time or box (expected use case)."""
        cmd = PlotCommand(matrix=[[1, 1]], kappa=[-1, 1])
        assert cmd.command == CommandType.PLOT
        assert cmd.time is None
        assert cmd.bbox is None
        assert cmd.version == config.PROTOCOL_VERSION

    def test_matrix_entries_keep_their_type(self):
        """Test rational strings survive validation (expected use case)."""
        cmd = PlotCommand(matrix=[[1, "1/2"]], kappa=[-1, 1])
        assert cmd.matrix == [[1, "1/2"]]

    def test_necklace_needs_one_source(self):
        """Test the matrix and pi fields are exclusive (failure case)."""
        with pytest.raises(ValueError):
            NecklaceCommand()
        with pytest.raises(ValueError):
            NecklaceCommand(matrix=[[1, 1]], pi=[2, 1])

    def test_triangulate_tuples(self):
        """Test diagonal lists become pairs (expected use case)."""
        cmd = TriangulateCommand(n=5, diagonals=[[1, 3], [1, 4]])
        assert cmd.diagonals == [(1, 3), (1, 4)]
        assert cmd.flips == []

    def test_verify_defaults(self):
        """Test the verify sample count default (expected use case)."""
        cmd = VerifyCommand(matrix=[[1, 1]], kappa=[-1, 1])
        assert cmd.samples == 100
        assert cmd.seed == 0

    def test_verify_response(self):
        """Test a verify response carries its checks (expected use case)."""
        response = VerifyResponse(
            command=CommandType.VERIFY,
            passed=False,
            checks=[CheckResult(name="lines", passed=False, detail="residual 1")],
        )
        data = json.loads(canonical_json(response))
        assert data["status"] == "success"
        assert data["checks"] == [{"detail": "residual 1", "name": "lines", "passed": False}]


class TestParseCommand:
    """Test cases for parse_command."""

    def test_parse_plot(self):
        """Test a plot request (expected use case)."""
        cmd = parse_command({"command": "plot", "matrix": [[1, 1]], "kappa": [-1, 1], "time": -2.0})
        assert isinstance(cmd, PlotCommand)
        assert cmd.time == -2.0

    def test_parse_tol(self):
        """Test the global tolerance is carried by every command (expected use case)."""
        cmd = parse_command({"command": "necklace", "pi": [3, 4, 1, 2], "tol": 1e-6})
        assert cmd.tol == 1e-6

    def test_unknown_command(self):
        """Test an unknown command name (failure case)."""
        with pytest.raises(InputFormatError):
            parse_command({"command": "draw"})

    def test_missing_command(self):
        """Test a request without a command (failure case)."""
        with pytest.raises(InputFormatError):
            parse_command({"matrix": [[1, 1]]})

    def test_missing_field(self):
        """Test a plot request without kappas (failure case)."""
        with pytest.raises(InputFormatError):
            parse_command({"command": "plot", "matrix": [[1, 1]]})

    def test_invalid_necklace(self):
        """Test model validator errors become input errors (failure case)."""
        with pytest.raises(InputFormatError):
            parse_command({"command": "necklace"})


class TestErrorResponse:
    """Test cases for error responses."""

    def test_from_domain_error(self):
        """Test a domain error keeps its type, code and details (expected use case)."""
        response = create_error_response(NotGeneric("sums coincide", {"d": 2}), CommandType.PLOT)
        assert isinstance(response, ErrorResponse)
        assert response.status == ResponseStatus.ERROR
        assert response.error_type == "NotGeneric"
        assert response.error_code == 1
        assert response.details == {"d": 2}
        assert response.command == CommandType.PLOT

    def test_input_error_code(self):
        """Test unparseable input has exit code 2 (edge case)."""
        response = create_error_response(InputFormatError("bad flag"))
        assert response.error_code == 2
        assert response.command is None


class TestCanonicalJson:
    """Test cases for canonical_json."""

    def test_sorted_and_indented(self):
        """Test key order and layout (expected use case)."""
        text = canonical_json({"b": 1, "a": [1, 2]})
        assert text == '{\n  "a": [\n    1,\n    2\n  ],\n  "b": 1\n}\n'

    def test_float_digits(self):
        """Test floats are rounded to twelve significant digits (expected use case)."""
        data = json.loads(canonical_json({"x": 0.1 + 0.2, "y": 1.0 / 3.0}))
        assert data["x"] == 0.3
        assert data["y"] == 0.333333333333

    def test_negative_zero(self):
        """Test -0.0 prints as 0.0 (edge case)."""
        data = json.loads(canonical_json({"x": -0.0, "y": [-0.0]}))
        assert data == {"x": 0.0, "y": [0.0]}
        assert "-0.0" not in canonical_json({"x": -0.0})

    def test_non_finite(self):
        """Test infinities become strings (edge case)."""
        data = json.loads(canonical_json({"x": float("inf")}))
        assert data["x"] == "inf"

    def test_tuple_keys_and_models(self):
        """Test tuples become lists and models are dumped (expected use case)."""
        assert json.loads(canonical_json({"pair": (1, 2)})) == {"pair": [1, 2]}
        first = canonical_json(PlotCommand(matrix=[[1, 1]], kappa=[-1, 1]))
        second = canonical_json(PlotCommand(matrix=[[1, 1]], kappa=[-1, 1]))
        assert first == second
        assert json.loads(first)["command"] == "plot"
