"""
Tests for the kp command line entry point.
"""

import json
from unittest import mock

import pytest

import main
from bridge.protocol import CommandType, ErrorResponse, NecklaceResponse
from core.errors import InputFormatError


class TestParsing:
    """Test cases for flag parsing helpers."""

    def test_parse_floats(self):
        """Test comma separated numbers (expected use case)."""
        assert main.parse_floats("-3,-1,0.5,2", "kappa") == [-3.0, -1.0, 0.5, 2.0]

    def test_parse_floats_rejects_text(self):
        """Test a non-number (failure case)."""
        with pytest.raises(InputFormatError):
            main.parse_floats("1,a", "kappa")

    def test_parse_ints(self):
        """Test a one-line permutation (expected use case)."""
        assert main.parse_ints("3,4,1,2", "pi") == [3, 4, 1, 2]

    def test_parse_pairs(self):
        """Test diagonal lists (expected use case)."""
        assert main.parse_pairs("1-3, 1-4", "diagonals") == [[1, 3], [1, 4]]
        with pytest.raises(InputFormatError):
            main.parse_pairs("1-3-5", "diagonals")

    def test_read_matrix(self, tmp_path):
        """Test the matrix JSON format (expected use case)."""
        path = tmp_path / "a.json"
        path.write_text(json.dumps({"k": 2, "n": 4, "rows": [[1, 0, -1, -2], [0, 1, 1, 1]]}))
        assert main.read_matrix(str(path)) == [[1, 0, -1, -2], [0, 1, 1, 1]]

    def test_read_matrix_wrong_shape(self, tmp_path):
        """Test declared sizes must match the rows (failure case)."""
        path = tmp_path / "a.json"
        path.write_text(json.dumps({"k": 1, "n": 4, "rows": [[1, 0, -1, -2], [0, 1, 1, 1]]}))
        with pytest.raises(InputFormatError):
            main.read_matrix(str(path))

    def test_read_matrix_missing_file(self, tmp_path):
        """Test an unreadable file (failure case)."""
        with pytest.raises(InputFormatError):
            main.read_matrix(str(tmp_path / "missing.json"))


class TestBuildRequest:
    """Test cases for turning flags into command requests."""

    def test_plot(self, tmp_path):
        """Test the plot flags, with a negative kappa list (expected use case)."""
        path = tmp_path / "a.json"
        path.write_text(json.dumps({"rows": [[1, 1]]}))
        args = main.parse_args(["--tol", "1e-6", "plot", "--matrix", str(path), "--kappa=-1,1", "--bbox=-2,2,-1,1"])
        request = main.build_request(args)
        assert request == {
            "command": "plot",
            "tol": 1e-6,
            "matrix": [[1, 1]],
            "kappa": [-1.0, 1.0],
            "time": None,
            "bbox": [-2.0, 2.0, -1.0, 1.0],
        }

    def test_plot_bad_bbox(self, tmp_path):
        """Test a box needs four numbers (failure case)."""
        path = tmp_path / "a.json"
        path.write_text(json.dumps({"rows": [[1, 1]]}))
        args = main.parse_args(["plot", "--matrix", str(path), "--kappa=-1,1", "--bbox=0,1"])
        with pytest.raises(InputFormatError):
            main.build_request(args)

    def test_triangulate_flips(self):
        """Test repeated --flip flags accumulate (expected use case)."""
        args = main.parse_args(["triangulate", "--n", "5", "--diagonals", "1-3,1-4", "--flip", "1-3", "--flip", "2-4"])
        request = main.build_request(args)
        assert request["diagonals"] == [[1, 3], [1, 4]]
        assert request["flips"] == [[1, 3], [2, 4]]

    def test_le2plabic_from_file(self, tmp_path):
        """Test the Le-diagram can come from a file (expected use case)."""
        path = tmp_path / "le.txt"
        path.write_text("++\n+0\n")
        args = main.parse_args(["le2plabic", "--le-file", str(path)])
        request = main.build_request(args)
        assert request["le"] == "++\n+0\n"
        assert "kappa" not in request

    def test_verify_defaults(self, tmp_path):
        """Test verify sample and seed defaults (expected use case)."""
        path = tmp_path / "a.json"
        path.write_text(json.dumps({"rows": [[1, 1]]}))
        args = main.parse_args(["verify", "--matrix", str(path), "--kappa=-1,1"])
        request = main.build_request(args)
        assert (request["samples"], request["seed"]) == (100, 0)

    def test_necklace_sources_exclusive(self):
        """Test necklace takes a matrix or a permutation, not both (failure case)."""
        with pytest.raises(SystemExit):
            main.parse_args(["necklace", "--matrix", "a.json", "--pi", "2,1"])


class TestMain:
    """Test cases for main()."""

    def test_success_prints_json(self, capsys):
        """Test a successful run prints the canonical response (expected use case)."""
        main.main(["necklace", "--pi", "3,4,1,2"])
        data = json.loads(capsys.readouterr().out)
        assert data["derangement"] == [3, 4, 1, 2]
        assert data["status"] == "success"

    def test_writes_json_file(self, tmp_path, capsys):
        """Test --json writes the same text as stdout (expected use case)."""
        out = tmp_path / "r.json"
        main.main(["necklace", "--pi", "2,1", "--json", str(out)])
        assert out.read_text() == capsys.readouterr().out

    def test_domain_error_exit_code(self, capsys):
        """Test a domain error exits with status 1 and prints the error (failure case)."""
        with pytest.raises(SystemExit) as info:
            main.main(["asymptotics", "--pi", "2,1", "--kappa=1,-1"])
        assert info.value.code == 1
        data = json.loads(capsys.readouterr().out)
        assert data["error_type"] == "NotIncreasing"

    def test_input_error_exit_code(self, capsys):
        """Test unparseable input exits with status 2 (failure case)."""
        with pytest.raises(SystemExit) as info:
            main.main(["asymptotics", "--pi", "2,x", "--kappa=-1,1"])
        assert info.value.code == 2
        assert json.loads(capsys.readouterr().out)["error_code"] == 2

    def test_unexpected_error(self):
        """Test an unexpected exception exits with status 1 (failure case)."""
        with mock.patch("main.CommandHandler") as handler:
            handler.return_value.handle.side_effect = RuntimeError("boom")
            with pytest.raises(SystemExit) as info:
                main.main(["necklace", "--pi", "2,1"])
        assert info.value.code == 1

    def test_artifacts_skipped_on_error(self, tmp_path):
        """Test no files are written for an error response (edge case)."""
        out = tmp_path / "r.json"
        error = ErrorResponse(command=CommandType.NECKLACE, error_message="x")
        with mock.patch("main.CommandHandler") as handler:
            handler.return_value.handle.return_value = error
            with pytest.raises(SystemExit):
                main.main(["necklace", "--pi", "2,1", "--json", str(out)])
        assert not out.exists()

    def test_svg_rendering_requested(self, tmp_path):
        """Test --out hands the graph to the renderer (expected use case)."""
        out = tmp_path / "g.svg"
        with mock.patch("bridge.render.render_graph") as render:
            main.main(["triangulate", "--n", "4", "--diagonals", "1-3", "--out", str(out)])
        render.assert_called_once()
        assert render.call_args[0][1] == out

    def test_response_type(self):
        """Test the necklace response model is used for necklace runs (expected use case)."""
        with mock.patch("main.write_artifacts") as write:
            main.main(["necklace", "--pi", "2,1"])
        assert isinstance(write.call_args[0][1], NecklaceResponse)
