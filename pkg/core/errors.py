"""
Exception hierarchy for kpsolitons.

Every error a core operation can raise derives from ``KPError`` so the
command handler can turn it into a structured error response.
"""

from typing import Any, Dict, Optional


class KPError(Exception):
    """Base class for all domain errors."""

    error_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = dict(details or {})


class InputFormatError(KPError, ValueError):
    """Input file or flag could not be parsed."""
    error_code = 2


# grassmann_core
class NotIncreasing(KPError, ValueError):
    """Kappa values are not strictly increasing."""


class NotGeneric(KPError, ValueError):
    """Two distinct sums of kappas coincide, or slopes tie."""


class RankDeficient(KPError, ValueError):
    """Matrix (or linear system) does not have full rank."""


class AmbiguousSign(KPError, ValueError):
    """A minor lies inside the tolerance band around zero."""


# positroid_combinatorics
class NotANecklace(KPError, ValueError):
    """Exchange condition between consecutive necklace terms fails."""


class NotIrreducible(KPError, ValueError):
    """Necklace or diagram belongs to a reducible cell."""


class NotFound(KPError):
    """Le-diagram search exhausted without a match."""


# plabic_graph
class StuckTrip(KPError):
    """A trip cannot continue (malformed rotation system)."""


class InconsistentLabels(KPError):
    """Face labels of different cardinalities."""


# soliton_engine
class EmptyMatroid(KPError, ValueError):
    """No nonzero Plücker coordinate."""


class NotTotallyNonnegative(KPError, ValueError):
    """Point has negative Plücker coordinates after sign normalisation."""


class NonGenericInput(KPError, ValueError):
    """Contour plot has degenerate vertices or irregular edges."""


class MalformedPlot(KPError, ValueError):
    """Contour plot does not have k top and n-k bottom solitons."""


class NotASchubertCell(KPError, ValueError):
    """Operation requires a TP Schubert cell."""


class NecklaceViolation(KPError):
    """Unbounded region labels do not form the expected necklace."""


class TimeSelectionError(KPError):
    """Soliton graphs did not stabilise while decreasing t."""


# triangulation_gr2n
class NotADiagonal(KPError, ValueError):
    """Chord is not a diagonal of the triangulation."""


# inverse_solver
class InconsistentCycle(KPError):
    """Ratio equations around a cycle do not sum to zero."""


class Disconnected(KPError):
    """Region adjacency graph is not connected."""


class InsufficientLabels(KPError):
    """Observed labels do not determine the point."""


class NoConvergence(KPError):
    """Numeric reconstruction did not reach the target residual."""
