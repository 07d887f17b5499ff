"""
Command handler for the kp tool.

Dispatches parsed command models to the core modules and wraps the
results in response models. Domain errors become ``ErrorResponse``
objects; anything else propagates to the caller.
"""

import logging
from typing import Callable, Dict, List, Optional

import numpy as np

from bridge.protocol import (
    AsymptoticsCommand,
    AsymptoticsResponse,
    CheckResult,
    Command,
    CommandType,
    InvertCommand,
    InvertResponse,
    Le2PlabicCommand,
    Le2PlabicResponse,
    NecklaceCommand,
    NecklaceResponse,
    PlotCommand,
    PlotResponse,
    Response,
    TriangulateCommand,
    TriangulateResponse,
    VerifyCommand,
    VerifyResponse,
    create_error_response,
)
from core.errors import KPError, MalformedPlot
from core.grassmann import GrassmannPoint, classify, pluecker_ratios, subset_key, validate_kappa
from core.inverse_solver import (
    derangement_from_plot,
    invert_plot,
    observed_from_plot,
    offsets_to_ratios,
    reconstruct_report,
    solve_logs,
)
from core.le_to_plabic import build_g_minus, pipe_grid, predict_graph_t_neg, prediction_report
from core.plabic_graph import label, plabic_from_soliton_graph, reduced_heuristic, trip_permutation
from core.positroid import (
    Derangement,
    LeDiagram,
    PositroidData,
    derangement_from_necklace,
    is_tp_schubert,
    lediagram_from_derangement,
    necklace_from_derangement,
    necklace_from_matroid,
)
from core.soliton_engine import (
    auto_negative_time,
    balancing_residual,
    contour_plot,
    line_residual,
    necklace_check,
    predict_asymptotics,
    read_derangement,
    sample_sandwich,
    slope_residual,
    soliton_graph,
    tropical_field,
)
from core.triangulation import Triangulation, flip, psi

# Configure logging
logger = logging.getLogger(__name__)

# Residual bound used by verify for geometric identities
VERIFY_TOL = 1e-7


class CommandHandler:
    """
    Executes kp commands.

    Each command type maps to one ``_handle_*`` method returning a response.
    """

    def __init__(self):
        self.command_handlers: Dict[CommandType, Callable[[Command], Response]] = {
            CommandType.PLOT: self._handle_plot,
            CommandType.ASYMPTOTICS: self._handle_asymptotics,
            CommandType.NECKLACE: self._handle_necklace,
            CommandType.LE2PLABIC: self._handle_le2plabic,
            CommandType.TRIANGULATE: self._handle_triangulate,
            CommandType.INVERT: self._handle_invert,
            CommandType.VERIFY: self._handle_verify,
        }

    def handle(self, command: Command) -> Response:
        """
        Run a command.

        Args:
            command: A parsed command model.

        Returns:
            Response: The command's response, or an ErrorResponse for a
            domain error.
        """
        handler = self.command_handlers[command.command]
        logger.debug(f"handling {command.command.value}")
        try:
            return handler(command)
        except KPError as e:
            logger.error(f"{command.command.value} failed: {type(e).__name__}: {e.message}")
            return create_error_response(e, command.command)

    def _handle_plot(self, command: PlotCommand) -> Response:
        point = GrassmannPoint.from_rows(command.matrix)
        kappa = validate_kappa(command.kappa, point.k)
        field = tropical_field(point, kappa, command.tol)
        if command.time is None:
            time, graph = auto_negative_time(field)
            plot = graph.plot
        else:
            time = command.time
            plot = contour_plot(field, time, command.bbox)
            graph = soliton_graph(plot) if plot.generic else None

        derangement = None
        if graph is not None:
            try:
                derangement = list(read_derangement(plot).pi)
            except MalformedPlot as e:
                logger.warning(f"could not read a derangement: {e.message}")
        return PlotResponse(
            command=command.command,
            time=time,
            plot=plot.to_dict(),
            soliton_graph=plabic_from_soliton_graph(graph).to_dict() if graph is not None else None,
            derangement=derangement,
        )

    def _handle_asymptotics(self, command: AsymptoticsCommand) -> Response:
        derangement = Derangement(tuple(command.pi))
        kappa = validate_kappa(command.kappa, derangement.k)
        asymptotics = predict_asymptotics(derangement, kappa)
        return AsymptoticsResponse(
            command=command.command,
            top=[list(p) for p in asymptotics.top],
            bottom=[list(p) for p in asymptotics.bottom],
            regions=[subset_key(r) for r in asymptotics.regions],
            x_negative_label=subset_key(asymptotics.regions[0]),
        )

    def _handle_necklace(self, command: NecklaceCommand) -> Response:
        if command.matrix is not None:
            point = GrassmannPoint.from_rows(command.matrix)
            _, matroid = classify(point, command.tol)
            necklace = necklace_from_matroid(matroid)
            derangement = derangement_from_necklace(necklace)
        else:
            derangement = Derangement(tuple(command.pi))
            necklace = necklace_from_derangement(derangement)
        diagram = lediagram_from_derangement(derangement, necklace.k, necklace.n)
        return NecklaceResponse(
            command=command.command,
            k=necklace.k,
            n=necklace.n,
            necklace=[subset_key(s) for s in necklace.subsets],
            derangement=list(derangement.pi),
            le_diagram=diagram.to_text("/"),
            tp_schubert=is_tp_schubert(derangement),
        )

    def _handle_le2plabic(self, command: Le2PlabicCommand) -> Response:
        diagram = LeDiagram.parse(command.le)
        graph = build_g_minus(diagram)
        predicted = None
        prediction = None
        if command.kappa is not None:
            kappa = validate_kappa(command.kappa, diagram.k)
            predicted = predict_graph_t_neg(diagram, kappa).to_dict()
            if command.check:
                prediction = prediction_report(diagram, kappa, seed=command.seed).to_dict()
        return Le2PlabicResponse(
            command=command.command,
            graph=graph.to_dict(),
            trip_permutation=list(trip_permutation(graph)),
            pipes=pipe_grid(diagram).to_dict(),
            predicted=predicted,
            prediction=prediction,
        )

    def _handle_triangulate(self, command: TriangulateCommand) -> Response:
        triangulation = Triangulation.from_chords(command.n, command.diagonals)
        for diagonal in command.flips:
            triangulation = flip(triangulation, diagonal)
        graph = psi(triangulation)
        labeling = label(graph)
        boundary = set(labeling.boundary_regions)
        bounded = sorted(
            subset_key(sorted(s)) for f, s in labeling.region_labels.items() if f not in boundary
        )
        return TriangulateResponse(
            command=command.command,
            triangulation=triangulation.to_dict(),
            graph=graph.to_dict(),
            bounded_labels=bounded,
            unbounded_labels=[subset_key(s) for s in labeling.unbounded_labels()],
            trip_permutation=list(trip_permutation(graph)),
            reduced=reduced_heuristic(graph).passed,
        )

    def _handle_invert(self, command: InvertCommand) -> Response:
        data = command.plot
        values = command.kappa if command.kappa is not None else data.get("kappa")
        if values is None:
            raise MalformedPlot("plot JSON has no kappa; pass --kappa")
        kappa = validate_kappa(values, int(data.get("k", 1)))
        if command.pi is not None:
            derangement = Derangement(tuple(command.pi))
        else:
            derangement = derangement_from_plot(data)
        cell = PositroidData.from_derangement(derangement)

        observed = observed_from_plot(data)
        if command.time is not None:
            observed.time = command.time
        solution = solve_logs(offsets_to_ratios(observed, kappa))
        report = reconstruct_report(solution.logs, cell, kappa, observed.time)
        report.residual = max(report.residual, solution.residual)
        return InvertResponse(
            command=command.command,
            report=report.to_dict(),
            pluecker={subset_key(s): v for s, v in pluecker_ratios(report.point).items()},
        )

    def _handle_verify(self, command: VerifyCommand) -> Response:
        point = GrassmannPoint.from_rows(command.matrix)
        kappa = validate_kappa(command.kappa, point.k)
        field = tropical_field(point, kappa, command.tol)
        if command.time is None:
            time, graph = auto_negative_time(field)
            plot = graph.plot
        else:
            time = command.time
            plot = contour_plot(field, time)
            graph = soliton_graph(plot)

        _, matroid = classify(point, command.tol)
        cell = PositroidData.from_matroid(matroid)
        checks: List[CheckResult] = []

        def run(name: str, check: Callable[[], Optional[str]]):
            try:
                detail = check()
                checks.append(CheckResult(name=name, passed=True, detail=detail or ""))
            except (AssertionError, KPError) as e:
                message = e.message if isinstance(e, KPError) else str(e)
                checks.append(CheckResult(name=name, passed=False, detail=message))
            except Exception as e:
                # A crashing check fails on its own; the remaining checks still run
                logger.exception(f"verify check {name} crashed")
                checks.append(CheckResult(name=name, passed=False, detail=f"{type(e).__name__}: {e}"))

        def derangement_check():
            found = read_derangement(plot)
            assert found == cell.derangement, f"plot gives {list(found.pi)}, cell is {list(cell.derangement.pi)}"
            return f"pi = {list(found.pi)}"

        def necklace():
            if not cell.is_tp_schubert:
                return "skipped: not a TP Schubert cell"
            found = necklace_check(plot)
            return " ".join(subset_key(s) for s in found.subsets)

        def balancing():
            worst = max((balancing_residual(plot, v) for v in range(len(plot.vertices))), default=0.0)
            assert worst <= VERIFY_TOL * (1 + max(map(abs, kappa.kappas))) ** 2, f"residual {worst:.3g}"
            return f"max residual {worst:.3g}"

        def lines():
            worst_line = max((line_residual(plot, e) for e in range(len(plot.edges))), default=0.0)
            worst_slope = max((slope_residual(plot, e) for e in range(len(plot.edges))), default=0.0)
            scale = 1 + max(abs(c) for c in plot.bbox)
            assert worst_line <= VERIFY_TOL * scale, f"line residual {worst_line:.3g}"
            assert worst_slope <= VERIFY_TOL, f"slope residual {worst_slope:.3g}"
            return f"line {worst_line:.3g}, slope {worst_slope:.3g}"

        def trips():
            found = trip_permutation(plabic_from_soliton_graph(graph))
            assert found == cell.derangement.pi, f"trip permutation {list(found)}"
            return f"pi = {list(found)}"

        def sandwich():
            report = sample_sandwich(field, point, kappa, time, np.random.default_rng(command.seed), command.samples)
            assert report.ok, f"violations {report.max_lower_violation:.3g} / {report.max_upper_violation:.3g}"
            return f"{report.count} samples"

        def inverse():
            report = invert_plot(plot, kappa, cell)
            original, found = pluecker_ratios(point), pluecker_ratios(report.point)
            error = max(abs(found[s] - original[s]) for s in original)
            assert error <= 1e-6, f"Plücker ratio error {error:.3g}"
            return f"{report.tier} tier, error {error:.3g}"

        run("derangement", derangement_check)
        run("necklace", necklace)
        run("balancing", balancing)
        run("lines", lines)
        run("trip_permutation", trips)
        run("sandwich", sandwich)
        run("inverse", inverse)
        passed = all(c.passed for c in checks)
        logger.info(f"verify: {sum(c.passed for c in checks)}/{len(checks)} checks passed")
        return VerifyResponse(command=command.command, time=time, passed=passed, checks=checks)
