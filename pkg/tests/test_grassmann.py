"""
Tests for the Grassmannian linear algebra module.
"""

import numpy as np
import pytest

from core.errors import AmbiguousSign, InputFormatError, NotGeneric, NotIncreasing, RankDeficient
from core.grassmann import (
    GrassmannPoint,
    Positivity,
    PositroidMatroid,
    classify,
    is_irreducible,
    parse_subset_key,
    pivot_columns,
    pluecker,
    pluecker_ratios,
    rref,
    subset_key,
    validate_kappa,
)


class TestSubsetKeys:
    """Test cases for subset keys."""

    def test_short_key(self):
        """Test single digit indices are concatenated (expected use case)."""
        assert subset_key((7, 1, 5, 2)) == "1257"
        assert parse_subset_key("1257") == (1, 2, 5, 7)

    def test_long_key(self):
        """Test two digit indices switch to commas (edge case)."""
        assert subset_key((10, 3)) == "3,10"
        assert parse_subset_key("3,10") == (3, 10)

    def test_bad_key(self):
        """Test a non-numeric key is rejected (failure case)."""
        with pytest.raises(InputFormatError):
            parse_subset_key("1a")


class TestValidateKappa:
    """Test cases for kappa validation."""

    def test_generic_kappa(self):
        """Test distinct pair sums are accepted (expected use case)."""
        kappa = validate_kappa([-3, -1, 0.5, 2], 2)
        assert kappa.n == 4
        assert kappa.value(3) == 0.5

    def test_not_increasing(self):
        """Test a decreasing list is rejected (failure case)."""
        with pytest.raises(NotIncreasing):
            validate_kappa([1.0, 0.0], 1)

    def test_coinciding_sums(self):
        """Test -3 + 2 == -1 + 0 makes the kappas non-generic for k = 2 (failure case)."""
        with pytest.raises(NotGeneric):
            validate_kappa([-3, -1, 0, 2], 2)

    def test_sums_ignored_for_k1(self):
        """Test pair sums do not matter for k = 1 (edge case)."""
        assert validate_kappa([-3, -1, 0, 2], 1).k == 1

    def test_empty(self):
        """Test an empty kappa list is rejected (failure case)."""
        with pytest.raises(ValueError):
            validate_kappa([], 1)


class TestGrassmannPoint:
    """Test cases for GrassmannPoint and Plücker coordinates."""

    def test_pluecker(self, tp_gr24):
        """Test the maximal minors of a rational matrix (expected use case)."""
        values = pluecker(tp_gr24)
        assert tp_gr24.is_exact
        assert values == {
            (1, 2): 1.0, (1, 3): 1.0, (1, 4): 1.0,
            (2, 3): 1.0, (2, 4): 2.0, (3, 4): 1.0,
        }

    def test_float_entries(self):
        """Test non-integral floats give a float point (expected use case)."""
        point = GrassmannPoint.from_rows([[1.0, 0.5]])
        assert not point.is_exact
        assert pluecker(point)[(2,)] == pytest.approx(0.5)

    def test_rational_strings(self):
        """Test rational strings are parsed exactly (expected use case)."""
        point = GrassmannPoint.from_rows([["1/3", "2/3"]])
        assert point.is_exact
        assert point.exact_pluecker[(1,)] * 2 == point.exact_pluecker[(2,)]

    def test_rank_deficient(self):
        """Test a rank one 2 x 2 matrix is rejected (failure case)."""
        with pytest.raises(RankDeficient):
            GrassmannPoint.from_rows([[1, 2], [2, 4]])

    def test_ragged_rows(self):
        """Test rows of different lengths are rejected (failure case)."""
        with pytest.raises(InputFormatError):
            GrassmannPoint.from_rows([[1, 2, 3], [0, 1]])

    def test_bad_entry(self):
        """Test an unparseable entry is rejected (failure case)."""
        with pytest.raises(InputFormatError):
            GrassmannPoint.from_rows([["abc", 1]])

    def test_ratios(self):
        """Test ratios divide by the largest minor (expected use case)."""
        ratios = pluecker_ratios(GrassmannPoint.from_rows([[1, 2]]))
        assert ratios == {(1,): 0.5, (2,): 1.0}


class TestClassify:
    """Test cases for the positivity classification."""

    def test_tp(self, tp_gr24):
        """Test a point with all minors positive (expected use case)."""
        positivity, matroid = classify(tp_gr24)
        assert positivity == Positivity.TP
        assert matroid.is_uniform()

    def test_tnn(self):
        """Test zero minors give a TNN point with fewer bases (expected use case)."""
        positivity, matroid = classify(GrassmannPoint.from_rows([[1, 0, 0], [0, 1, 0]]))
        assert positivity == Positivity.TNN
        assert matroid.sorted_bases() == [(1, 2)]

    def test_sign_normalisation(self):
        """Test a globally negative point is still TP (edge case)."""
        positivity, _ = classify(GrassmannPoint.from_rows([[-1, -1]]))
        assert positivity == Positivity.TP

    def test_neither(self):
        """Test mixed signs (expected use case)."""
        positivity, _ = classify(GrassmannPoint.from_rows([[1, -1]]))
        assert positivity == Positivity.NEITHER

    def test_ambiguous(self):
        """Test a minor inside the tolerance band raises (failure case)."""
        point = GrassmannPoint.from_rows([[1.0, 5e-9]])
        with pytest.raises(AmbiguousSign) as excinfo:
            classify(point, tol=1e-9)
        assert excinfo.value.details["subsets"] == ["2"]

    def test_tolerance_from_environment(self, monkeypatch):
        """Test KP_TOL sets the default tolerance (expected use case)."""
        monkeypatch.setenv("KP_TOL", "1e-3")
        positivity, matroid = classify(GrassmannPoint.from_rows([[1.0, 1e-4]]))
        assert positivity == Positivity.TNN
        assert matroid.sorted_bases() == [(1,)]

    def test_uniform_matroid(self):
        """Test uniformity compares the basis count with n choose k (expected use case)."""
        pairs = frozenset((i, j) for i in range(1, 5) for j in range(i + 1, 5))
        assert PositroidMatroid(k=2, n=4, bases=pairs).is_uniform()
        assert not PositroidMatroid(k=2, n=4, bases=pairs - {(1, 3)}).is_uniform()


class TestEchelonForm:
    """Test cases for rref, pivots and irreducibility."""

    def test_exact_rref(self):
        """Test the exact echelon form (expected use case)."""
        reduced = rref(GrassmannPoint.from_rows([[2, 2, 0], [0, 1, 1]]))
        assert reduced.to_rows() == [[1.0, 0.0, -1.0], [0.0, 1.0, 1.0]]
        assert pivot_columns(reduced) == (1, 2)

    def test_float_rref_keeps_point(self):
        """Test the float echelon form has the same Plücker ratios (expected use case)."""
        point = GrassmannPoint.from_rows([[2.5, 1.0, 0.5], [0.5, 1.5, 2.0]])
        reduced = rref(point)
        before, after = pluecker_ratios(point), pluecker_ratios(reduced)
        for subset in before:
            assert after[subset] == pytest.approx(before[subset])
        assert np.allclose(reduced.matrix[:, :2], np.eye(2))

    def test_irreducible(self):
        """Test irreducibility of the echelon form (expected use case)."""
        assert is_irreducible(GrassmannPoint.from_rows([[1, 0, -1], [0, 1, 1]]))

    def test_reducible(self):
        """Test a row with only its pivot is reducible (edge case)."""
        assert not is_irreducible(GrassmannPoint.from_rows([[1, 0, 0], [0, 1, 1]]))
