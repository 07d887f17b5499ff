"""
Protocol definition for the kp command line.

Every subcommand is described by a pydantic command model and answered by a
response model. Responses are serialised with ``canonical_json`` so that
identical inputs give byte-identical output.
"""

import json
import math
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ValidationError, model_validator

import config
from core.errors import InputFormatError, KPError

Entry = Union[int, float, str]


class CommandType(str, Enum):
    """Subcommands of the kp tool."""
    PLOT = "plot"
    ASYMPTOTICS = "asymptotics"
    NECKLACE = "necklace"
    LE2PLABIC = "le2plabic"
    TRIANGULATE = "triangulate"
    INVERT = "invert"
    VERIFY = "verify"


class Command(BaseModel):
    """Base model for all commands."""
    command: CommandType
    version: str = config.PROTOCOL_VERSION
    tol: Optional[float] = None


class PlotCommand(Command):
    """Contour plot and soliton graph of a point."""
    command: CommandType = CommandType.PLOT
    matrix: List[List[Entry]]
    kappa: List[float]
    time: Optional[float] = None  # None selects t << 0 automatically
    bbox: Optional[Tuple[float, float, float, float]] = None


class AsymptoticsCommand(Command):
    """Unbounded solitons predicted from a derangement."""
    command: CommandType = CommandType.ASYMPTOTICS
    pi: List[int]
    kappa: List[float]


class NecklaceCommand(Command):
    """Necklace, derangement and Le-diagram of a point or a permutation."""
    command: CommandType = CommandType.NECKLACE
    matrix: Optional[List[List[Entry]]] = None
    pi: Optional[List[int]] = None

    @model_validator(mode="after")
    def _one_source(self) -> "NecklaceCommand":
        if (self.matrix is None) == (self.pi is None):
            raise ValueError("give exactly one of matrix and pi")
        return self


class Le2PlabicCommand(Command):
    """G_-(L) of a Le-diagram, optionally with the t << 0 prediction."""
    command: CommandType = CommandType.LE2PLABIC
    le: str
    kappa: Optional[List[float]] = None
    check: bool = False
    seed: int = 0


class TriangulateCommand(Command):
    """psi(T) of a triangulation after optional flips."""
    command: CommandType = CommandType.TRIANGULATE
    n: int
    diagonals: List[Tuple[int, int]]
    flips: List[Tuple[int, int]] = []


class InvertCommand(Command):
    """Reconstruct a point from plot JSON."""
    command: CommandType = CommandType.INVERT
    plot: Dict[str, Any]
    kappa: Optional[List[float]] = None
    time: Optional[float] = None
    pi: Optional[List[int]] = None


class VerifyCommand(Command):
    """Cross-validation suite on one point."""
    command: CommandType = CommandType.VERIFY
    matrix: List[List[Entry]]
    kappa: List[float]
    time: Optional[float] = None
    seed: int = 0
    samples: int = 100


class ResponseStatus(str, Enum):
    """Status of the response."""
    SUCCESS = "success"
    ERROR = "error"


class Response(BaseModel):
    """Base model for all responses."""
    command: Optional[CommandType] = None
    status: ResponseStatus
    version: str = config.PROTOCOL_VERSION


class ErrorResponse(Response):
    """Error response."""
    status: ResponseStatus = ResponseStatus.ERROR
    error_message: str
    error_code: int = 1
    error_type: str = "KPError"
    details: Dict[str, Any] = {}


class PlotResponse(Response):
    status: ResponseStatus = ResponseStatus.SUCCESS
    time: float
    plot: Dict[str, Any]
    soliton_graph: Optional[Dict[str, Any]] = None
    derangement: Optional[List[int]] = None


class AsymptoticsResponse(Response):
    status: ResponseStatus = ResponseStatus.SUCCESS
    top: List[List[int]]
    bottom: List[List[int]]
    regions: List[str]
    x_negative_label: str


class NecklaceResponse(Response):
    status: ResponseStatus = ResponseStatus.SUCCESS
    k: int
    n: int
    necklace: List[str]
    derangement: List[int]
    le_diagram: str
    tp_schubert: bool


class Le2PlabicResponse(Response):
    status: ResponseStatus = ResponseStatus.SUCCESS
    graph: Dict[str, Any]
    trip_permutation: List[int]
    pipes: Dict[str, Any]
    predicted: Optional[Dict[str, Any]] = None
    prediction: Optional[Dict[str, Any]] = None


class TriangulateResponse(Response):
    status: ResponseStatus = ResponseStatus.SUCCESS
    triangulation: Dict[str, Any]
    graph: Dict[str, Any]
    bounded_labels: List[str]
    unbounded_labels: List[str]
    trip_permutation: List[int]
    reduced: bool


class InvertResponse(Response):
    status: ResponseStatus = ResponseStatus.SUCCESS
    report: Dict[str, Any]
    pluecker: Dict[str, float]


class CheckResult(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class VerifyResponse(Response):
    status: ResponseStatus = ResponseStatus.SUCCESS
    time: Optional[float] = None
    passed: bool
    checks: List[CheckResult]


COMMAND_MODELS = {
    CommandType.PLOT: PlotCommand,
    CommandType.ASYMPTOTICS: AsymptoticsCommand,
    CommandType.NECKLACE: NecklaceCommand,
    CommandType.LE2PLABIC: Le2PlabicCommand,
    CommandType.TRIANGULATE: TriangulateCommand,
    CommandType.INVERT: InvertCommand,
    CommandType.VERIFY: VerifyCommand,
}


def parse_command(data: Dict[str, Any]) -> Command:
    """
    Build the command model named by ``data["command"]``.

    Raises:
        InputFormatError: If the command is unknown or its fields invalid.
    """
    try:
        model = COMMAND_MODELS[CommandType(data.get("command"))]
        return model(**data)
    except (ValueError, ValidationError) as e:
        raise InputFormatError(f"Invalid command: {e}") from e


def create_error_response(error: KPError, command: Optional[CommandType] = None) -> ErrorResponse:
    """Structured response for a domain error."""
    return ErrorResponse(
        command=command,
        error_message=error.message,
        error_code=error.error_code,
        error_type=type(error).__name__,
        details=error.details,
    )


def _canonical(value: Any) -> Any:
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            return str(value)
        rounded = float(f"{value:.{config.JSON_SIGNIFICANT_DIGITS}g}")
        return 0.0 if rounded == 0 else rounded
    if isinstance(value, dict):
        return {str(k): _canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    if isinstance(value, Enum):
        return value.value
    return value


def canonical_json(payload: Union[BaseModel, Dict[str, Any], List[Any]]) -> str:
    """Sorted keys, floats at 12 significant digits, two-space indent, trailing newline."""
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    return json.dumps(_canonical(payload), sort_keys=True, indent=config.JSON_INDENT) + "\n"
