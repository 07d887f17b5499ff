"""
Linear algebra for points of the real Grassmannian.

This module represents a point of Gr(k, n) by a full-rank k x n matrix and
provides its Plücker coordinates (maximal minors), the reduced row echelon
representative, the positivity classification and the positroid matroid.
Matrices with rational entries are also kept as exact sympy matrices so that
matroid membership and pivot sets never depend on floating point noise.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

import config
from core.errors import AmbiguousSign, InputFormatError, NotGeneric, NotIncreasing, RankDeficient

# Configure logging
logger = logging.getLogger(__name__)

Subset = Tuple[int, ...]
Entry = Union[int, float, Fraction, str, sympy.Rational]


def subset_key(subset: Iterable[int]) -> str:
    """
    Encode a subset as sorted concatenated indices ("1257").

    Indices of two or more digits are joined with commas so keys stay unambiguous.
    """
    items = sorted(subset)
    if any(i >= 10 for i in items):
        return ",".join(str(i) for i in items)
    return "".join(str(i) for i in items)


def parse_subset_key(key: str) -> Subset:
    """Inverse of ``subset_key``."""
    try:
        if "," in key:
            return tuple(sorted(int(part) for part in key.split(",")))
        return tuple(sorted(int(ch) for ch in key))
    except ValueError as e:
        raise InputFormatError(f"Invalid subset key: {key!r}") from e


@dataclass(frozen=True)
class KappaParams:
    """Validated parameters kappa_1 < ... < kappa_n."""
    kappas: Tuple[float, ...]
    k: int

    @property
    def n(self) -> int:
        return len(self.kappas)

    def array(self) -> np.ndarray:
        return np.asarray(self.kappas, dtype=float)

    def value(self, index: int) -> float:
        """Kappa for a 1-based index."""
        return self.kappas[index - 1]


def validate_kappa(values: Sequence[float], k: int, tol: Optional[float] = None) -> KappaParams:
    """
    Validate soliton parameters.

    Args:
        values: Candidate kappa values in index order.
        k: Rank bound; d-sums are compared for 2 <= d <= k.
        tol: Relative tolerance for equal sums (defaults to ``config.GEOMETRY_TOL``).

    Returns:
        KappaParams: The validated parameters.

    Raises:
        InputFormatError: If the list is empty or k < 1.
        NotIncreasing: If some kappa_i >= kappa_{i+1}.
        NotGeneric: If two distinct d-element sums coincide.
    """
    if len(values) == 0:
        raise InputFormatError("kappa list must not be empty")
    if k < 1:
        raise InputFormatError(f"k must be at least 1, got {k}")
    kappas = tuple(float(v) for v in values)
    for i in range(len(kappas) - 1):
        if not kappas[i] < kappas[i + 1]:
            raise NotIncreasing(
                f"kappa_{i + 1} = {kappas[i]} is not below kappa_{i + 2} = {kappas[i + 1]}",
                {"index": i + 1},
            )

    tol = config.GEOMETRY_TOL if tol is None else tol
    scale = max(1.0, max(abs(v) for v in kappas))
    for d in range(2, min(k, len(kappas)) + 1):
        sums = sorted(
            (sum(kappas[i - 1] for i in subset), subset)
            for subset in combinations(range(1, len(kappas) + 1), d)
        )
        for (s1, a), (s2, b) in zip(sums, sums[1:]):
            if s2 - s1 <= tol * scale:
                raise NotGeneric(
                    f"sums over {list(a)} and {list(b)} coincide ({s1:.12g})",
                    {"d": d, "subsets": [list(a), list(b)]},
                )
    return KappaParams(kappas=kappas, k=k)


class Positivity(str, Enum):
    """Sign pattern of the Plücker vector."""
    TP = "TP"
    TNN = "TNN"
    NEITHER = "neither"


@dataclass(frozen=True)
class PositroidMatroid:
    """Set of k-subsets with nonzero Plücker coordinate."""
    k: int
    n: int
    bases: FrozenSet[Subset]

    def __post_init__(self):
        if not self.bases:
            raise ValueError("a matroid needs at least one basis")
        for basis in self.bases:
            if len(basis) != self.k:
                raise ValueError(f"basis {basis} does not have size {self.k}")

    def sorted_bases(self) -> List[Subset]:
        return sorted(self.bases)

    def is_basis(self, subset: Iterable[int]) -> bool:
        return tuple(sorted(subset)) in self.bases

    def is_uniform(self) -> bool:
        return len(self.bases) == math.comb(self.n, self.k)


def _to_exact(value: Entry) -> Optional[sympy.Rational]:
    """Exact rational for ints, fractions, rational strings and integral floats."""
    if isinstance(value, bool):
        return sympy.Integer(int(value))
    if isinstance(value, int):
        return sympy.Integer(value)
    if isinstance(value, Fraction):
        return sympy.Rational(value.numerator, value.denominator)
    if isinstance(value, sympy.Rational):
        return value
    if isinstance(value, float):
        return sympy.Integer(int(value)) if value.is_integer() else None
    if isinstance(value, str):
        try:
            return sympy.Rational(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError) as e:
            raise InputFormatError(f"Matrix entry is not a rational number: {value!r}") from e
    return None


class GrassmannPoint:
    """
    A point of Gr(k, n) given by a full-rank k x n matrix.

    The float matrix is always available; ``exact`` holds a sympy matrix when
    every entry is rational. Plücker coordinates are cached on first use.
    """

    def __init__(self, matrix: np.ndarray, exact: Optional[sympy.Matrix] = None):
        matrix = np.array(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] == 0 or matrix.shape[0] > matrix.shape[1]:
            raise RankDeficient(f"expected a k x n matrix with k <= n, got shape {matrix.shape}")
        matrix.setflags(write=False)
        self.matrix = matrix
        self.exact = exact

        if exact is not None:
            rank = exact.rank()
        else:
            rank = int(np.linalg.matrix_rank(matrix))
        if rank < self.k:
            raise RankDeficient(f"matrix has rank {rank}, expected {self.k}", {"rank": rank})

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Entry]]) -> "GrassmannPoint":
        """
        Build a point from nested rows.

        Args:
            rows: Row lists of ints, floats, fractions or rational strings.

        Returns:
            GrassmannPoint: Exact when every entry is rational.

        Raises:
            InputFormatError: If rows are ragged or entries unparseable.
            RankDeficient: If the matrix does not have full row rank.
        """
        if not rows or any(len(row) != len(rows[0]) for row in rows):
            raise InputFormatError("matrix rows must be non-empty and of equal length")
        exact_rows = [[_to_exact(v) for v in row] for row in rows]
        if all(v is not None for row in exact_rows for v in row):
            exact = sympy.Matrix(exact_rows)
            return cls(np.array(exact.tolist(), dtype=float), exact)
        return cls(np.array([[float(v) for v in row] for row in rows], dtype=float))

    @property
    def k(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def subsets(self) -> List[Subset]:
        return [tuple(c) for c in combinations(range(1, self.n + 1), self.k)]

    @cached_property
    def pluecker(self) -> Dict[Subset, float]:
        if self.exact is not None:
            return {subset: float(value) for subset, value in self.exact_pluecker.items()}
        return {
            subset: float(np.linalg.det(self.matrix[:, [i - 1 for i in subset]]))
            for subset in self.subsets()
        }

    @cached_property
    def exact_pluecker(self) -> Dict[Subset, sympy.Rational]:
        if self.exact is None:
            raise ValueError("point has no exact representation")
        return {
            subset: self.exact.extract(list(range(self.k)), [i - 1 for i in subset]).det()
            for subset in self.subsets()
        }

    def to_rows(self) -> List[List[float]]:
        return [[float(v) for v in row] for row in self.matrix]

    def __repr__(self) -> str:
        kind = "exact" if self.is_exact else "float"
        return f"GrassmannPoint(k={self.k}, n={self.n}, {kind})"


def pluecker(point: GrassmannPoint) -> Dict[Subset, float]:
    """
    Plücker coordinates of a point.

    Returns:
        Dict[Subset, float]: Delta_I = det of columns I for every k-subset I.
    """
    return dict(point.pluecker)


def pluecker_ratios(point: GrassmannPoint) -> Dict[Subset, float]:
    """Plücker vector divided by its entry of largest magnitude."""
    values = point.pluecker
    top = max(values.values(), key=abs)
    return {subset: value / top for subset, value in values.items()}


def _zero_pattern(point: GrassmannPoint, tol: float) -> Tuple[Dict[Subset, int], List[Subset]]:
    """
    Sign of every minor (-1, 0, 1) and the list of ambiguous subsets.
    """
    if point.exact is not None:
        signs = {s: (0 if v == 0 else (1 if v > 0 else -1)) for s, v in point.exact_pluecker.items()}
        return signs, []

    values = point.pluecker
    scale = max(abs(v) for v in values.values())
    zero_cut = tol * scale
    safe_cut = config.AMBIGUOUS_FACTOR * tol * scale
    signs: Dict[Subset, int] = {}
    ambiguous: List[Subset] = []
    for subset, value in values.items():
        if abs(value) <= zero_cut:
            signs[subset] = 0
        elif abs(value) < safe_cut:
            ambiguous.append(subset)
            signs[subset] = 1 if value > 0 else -1
        else:
            signs[subset] = 1 if value > 0 else -1
    return signs, ambiguous


def classify(point: GrassmannPoint, tol: Optional[float] = None) -> Tuple[Positivity, PositroidMatroid]:
    """
    Classify the sign pattern of a point and extract its matroid.

    Signs are normalised so that the lexicographically first basis has a
    positive minor.

    Args:
        point: The point to classify.
        tol: Zero tolerance relative to max |Delta| (defaults to ``config.tolerance()``).

    Returns:
        Tuple[Positivity, PositroidMatroid]: Positivity class and bases.

    Raises:
        AmbiguousSign: If some minor lies in the band (tol, 10 tol) * max.
    """
    tol = config.tolerance() if tol is None else tol
    signs, ambiguous = _zero_pattern(point, tol)
    if ambiguous:
        raise AmbiguousSign(
            f"{len(ambiguous)} minor(s) too close to zero to classify",
            {"subsets": [subset_key(s) for s in sorted(ambiguous)]},
        )

    bases = frozenset(s for s, sign in signs.items() if sign != 0)
    matroid = PositroidMatroid(k=point.k, n=point.n, bases=bases)
    normaliser = signs[min(bases)]
    normalised = {s: sign * normaliser for s, sign in signs.items()}

    if any(sign < 0 for sign in normalised.values()):
        positivity = Positivity.NEITHER
    elif matroid.is_uniform():
        positivity = Positivity.TP
    else:
        positivity = Positivity.TNN
    logger.debug(f"classified {point!r} as {positivity.value} with {len(bases)} bases")
    return positivity, matroid


def rref(point: GrassmannPoint, tol: Optional[float] = None) -> GrassmannPoint:
    """
    Reduced row echelon representative of the same Grassmannian point.

    Exact points go through sympy. Float points are reduced by solving
    against the lexicographically first basis, which is the pivot set of the
    echelon form.

    Raises:
        RankDeficient: If the matrix does not have full rank.
    """
    if point.exact is not None:
        reduced, _ = point.exact.rref()
        return GrassmannPoint(np.array(reduced.tolist(), dtype=float), reduced)

    tol = config.tolerance() if tol is None else tol
    values = point.pluecker
    scale = max(abs(v) for v in values.values())
    candidates = [s for s in sorted(values) if abs(values[s]) > tol * scale]
    if not candidates:
        raise RankDeficient("all maximal minors vanish")
    pivots = [i - 1 for i in candidates[0]]
    try:
        reduced = np.linalg.solve(point.matrix[:, pivots], point.matrix)
    except np.linalg.LinAlgError as e:
        raise RankDeficient(f"pivot block is singular: {e}") from e

    # Snap noise so the echelon structure is exact
    noise = 1e-12 * max(1.0, float(np.max(np.abs(reduced))))
    reduced[np.abs(reduced) < noise] = 0.0
    for row, col in enumerate(pivots):
        reduced[:, col] = 0.0
        reduced[row, col] = 1.0
    return GrassmannPoint(reduced)


def pivot_columns(point: GrassmannPoint, tol: Optional[float] = None) -> Subset:
    """1-based pivot columns of the echelon form."""
    reduced = rref(point, tol)
    pivots = []
    for row in reduced.matrix:
        nonzero = np.flatnonzero(row)
        pivots.append(int(nonzero[0]) + 1)
    return tuple(pivots)


def is_irreducible(point: GrassmannPoint, tol: Optional[float] = None) -> bool:
    """
    Check that the echelon form has no zero column and that every row has
    a nonzero entry besides its pivot.
    """
    tol = config.tolerance() if tol is None else tol
    reduced = rref(point, tol)
    if reduced.exact is not None:
        matrix = reduced.exact
        nonzero = [[matrix[r, c] != 0 for c in range(point.n)] for r in range(point.k)]
    else:
        scale = max(1.0, float(np.max(np.abs(reduced.matrix))))
        nonzero = (np.abs(reduced.matrix) > tol * scale).tolist()

    for col in range(point.n):
        if not any(nonzero[row][col] for row in range(point.k)):
            logger.debug(f"column {col + 1} vanishes in the echelon form")
            return False
    for row in range(point.k):
        if sum(1 for flag in nonzero[row] if flag) < 2:
            logger.debug(f"row {row + 1} has only its pivot")
            return False
    return True
