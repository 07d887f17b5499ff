"""
Main entry point for the kp command line tool.

Parses the subcommand and its flags into a command model, runs it through
the command handler, prints the canonical JSON response and writes the
requested artifacts.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import config
from bridge.handler import CommandHandler
from bridge.protocol import (
    CommandType,
    ErrorResponse,
    canonical_json,
    create_error_response,
    parse_command,
)
from core.errors import InputFormatError, KPError

# Configure logging
logger = logging.getLogger("kp")


def setup_logging(verbose: bool = False) -> None:
    """
    Set up logging configuration.

    Args:
        verbose (bool): Whether to use verbose (DEBUG) logging.
    """
    log_level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=log_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
        force=True,
    )


def parse_floats(text: str, name: str) -> List[float]:
    """Parse "a,b,c" into floats."""
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise InputFormatError(f"--{name} expects comma separated numbers, got {text!r}") from e


def parse_ints(text: str, name: str) -> List[int]:
    """Parse "a,b,c" into integers."""
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise InputFormatError(f"--{name} expects comma separated integers, got {text!r}") from e


def parse_pairs(text: str, name: str) -> List[List[int]]:
    """Parse "1-3,1-4" into [[1, 3], [1, 4]]."""
    pairs = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            i, j = item.split("-")
            pairs.append([int(i), int(j)])
        except ValueError as e:
            raise InputFormatError(f"--{name} expects i-j pairs, got {item!r}") from e
    return pairs


def read_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise InputFormatError(f"Could not read JSON from {path}: {e}") from e


def read_matrix(path: str) -> List[List[Any]]:
    """Matrix JSON {"k": int, "n": int, "rows": [[...], ...]}."""
    data = read_json(path)
    try:
        rows = data["rows"]
        if "k" in data and int(data["k"]) != len(rows):
            raise InputFormatError(f"matrix declares k={data['k']} but has {len(rows)} rows")
        if "n" in data and any(len(row) != int(data["n"]) for row in rows):
            raise InputFormatError(f"matrix rows do not all have n={data['n']} entries")
    except (KeyError, TypeError) as e:
        raise InputFormatError(f"Malformed matrix JSON in {path}: {e}") from e
    return rows


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """
    Parse command line arguments.

    Returns:
        argparse.Namespace: Parsed arguments.
    """
    parser = argparse.ArgumentParser(prog="kp", description="KP line-solitons from the totally nonnegative Grassmannian")
    parser.add_argument("--verbose", action="store_true", default=config.CLI_DEFAULT_VERBOSE, help="Enable verbose logging")
    parser.add_argument("--tol", type=float, help=f"Zero tolerance for minors (default ${config.TOL_ENV_VAR} or {config.DEFAULT_TOL})")
    sub = parser.add_subparsers(dest="command", required=True)

    plot = sub.add_parser("plot", help="Contour plot and soliton graph of a point")
    plot.add_argument("--matrix", required=True, help="Matrix JSON file")
    plot.add_argument("--kappa", required=True, help='Comma separated kappas, e.g. --kappa=-3,-1,0.5,2')
    plot.add_argument("--time", type=float, help="Time (default: automatic t << 0)")
    plot.add_argument("--bbox", help="xmin,xmax,ymin,ymax")
    plot.add_argument("--out", help="SVG output path")
    plot.add_argument("--json", help="JSON output path")

    asymptotics = sub.add_parser("asymptotics", help="Unbounded solitons of a derangement")
    asymptotics.add_argument("--pi", required=True, help="One-line permutation, e.g. 6,7,1,2,8,3,9,4,5")
    asymptotics.add_argument("--kappa", required=True)
    asymptotics.add_argument("--json")

    necklace = sub.add_parser("necklace", help="Necklace, derangement and Le-diagram")
    source = necklace.add_mutually_exclusive_group(required=True)
    source.add_argument("--matrix", help="Matrix JSON file")
    source.add_argument("--pi", help="One-line permutation")
    necklace.add_argument("--json")

    le2plabic = sub.add_parser("le2plabic", help="Plabic graph G_-(L) of a Le-diagram")
    diagram = le2plabic.add_mutually_exclusive_group(required=True)
    diagram.add_argument("--le", help='Rows separated by "/", e.g. "++/+0"')
    diagram.add_argument("--le-file", help="Le-diagram text file")
    le2plabic.add_argument("--kappa", help="Also predict the t << 0 soliton graph")
    le2plabic.add_argument("--check", action="store_true", help="Compare the prediction with a computed graph")
    le2plabic.add_argument("--seed", type=int, default=0)
    le2plabic.add_argument("--out", help="SVG output path")
    le2plabic.add_argument("--json")

    triangulate = sub.add_parser("triangulate", help="Soliton graph of a polygon triangulation")
    triangulate.add_argument("--n", type=int, required=True)
    triangulate.add_argument("--diagonals", required=True, help='e.g. "1-3,1-4,1-5"')
    triangulate.add_argument("--flip", action="append", default=[], help="Diagonal to flip, e.g. 1-3 (repeatable)")
    triangulate.add_argument("--out", help="SVG output path")
    triangulate.add_argument("--json")

    invert = sub.add_parser("invert", help="Reconstruct a point from plot JSON")
    invert.add_argument("--plot", required=True, help="Plot JSON written by kp plot")
    invert.add_argument("--kappa", help="Kappas (default: the ones stored in the plot)")
    invert.add_argument("--time", type=float, help="Time (default: the one stored in the plot)")
    invert.add_argument("--pi", help="Derangement of the cell (default: read from the unbounded solitons)")
    invert.add_argument("--out", help="Matrix JSON output path")
    invert.add_argument("--json")

    verify = sub.add_parser("verify", help="Run the cross-validation suite on a point")
    verify.add_argument("--matrix", required=True)
    verify.add_argument("--kappa", required=True)
    verify.add_argument("--time", type=float)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--samples", type=int, default=100)
    verify.add_argument("--json")

    return parser.parse_args(argv)


def build_request(args: argparse.Namespace) -> Dict[str, Any]:
    """Turn parsed flags into the command dict for ``parse_command``."""
    request: Dict[str, Any] = {"command": args.command, "tol": args.tol}
    command = CommandType(args.command)
    if command == CommandType.PLOT:
        request.update(matrix=read_matrix(args.matrix), kappa=parse_floats(args.kappa, "kappa"), time=args.time)
        if args.bbox:
            bbox = parse_floats(args.bbox, "bbox")
            if len(bbox) != 4:
                raise InputFormatError(f"--bbox needs four numbers, got {len(bbox)}")
            request["bbox"] = bbox
    elif command == CommandType.ASYMPTOTICS:
        request.update(pi=parse_ints(args.pi, "pi"), kappa=parse_floats(args.kappa, "kappa"))
    elif command == CommandType.NECKLACE:
        if args.matrix:
            request["matrix"] = read_matrix(args.matrix)
        else:
            request["pi"] = parse_ints(args.pi, "pi")
    elif command == CommandType.LE2PLABIC:
        text = args.le if args.le is not None else _read_text(args.le_file)
        request.update(le=text, check=args.check, seed=args.seed)
        if args.kappa:
            request["kappa"] = parse_floats(args.kappa, "kappa")
    elif command == CommandType.TRIANGULATE:
        request.update(
            n=args.n,
            diagonals=parse_pairs(args.diagonals, "diagonals"),
            flips=[pair for text in args.flip for pair in parse_pairs(text, "flip")],
        )
    elif command == CommandType.INVERT:
        request.update(plot=read_json(args.plot), time=args.time)
        if args.kappa:
            request["kappa"] = parse_floats(args.kappa, "kappa")
        if args.pi:
            request["pi"] = parse_ints(args.pi, "pi")
    elif command == CommandType.VERIFY:
        request.update(
            matrix=read_matrix(args.matrix),
            kappa=parse_floats(args.kappa, "kappa"),
            time=args.time,
            seed=args.seed,
            samples=args.samples,
        )
    return request


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise InputFormatError(f"Could not read {path}: {e}") from e


def write_artifacts(args: argparse.Namespace, response) -> None:
    """SVG and JSON files requested by ``--out`` / ``--json``."""
    text = canonical_json(response)
    if getattr(args, "json", None):
        Path(args.json).write_text(text)
        logger.info(f"Wrote {args.json}")
    out = getattr(args, "out", None)
    if not out:
        return
    # Rendering pulls in matplotlib; import only when a figure is asked for
    from bridge.render import render_contour, render_graph

    if args.command == CommandType.PLOT.value:
        render_contour(response.plot, Path(out))
    elif args.command == CommandType.LE2PLABIC.value:
        render_graph(response.predicted or response.graph, Path(out))
    elif args.command == CommandType.TRIANGULATE.value:
        render_graph(response.graph, Path(out))
    elif args.command == CommandType.INVERT.value:
        matrix = response.report["matrix"]
        payload = {"k": len(matrix), "n": len(matrix[0]), "rows": matrix}
        Path(out).write_text(canonical_json(payload))
        logger.info(f"Wrote {out}")


def main(argv: Optional[List[str]] = None) -> None:
    """
    Main entry point for the application.

    Exit status is 0 on success, 1 for a domain error (the error JSON is
    printed on stdout) and 2 for unparseable input.
    """
    args = parse_args(argv)
    setup_logging(args.verbose)

    try:
        command = parse_command(build_request(args))
        response = CommandHandler().handle(command)
        sys.stdout.write(canonical_json(response))
        if isinstance(response, ErrorResponse):
            sys.exit(response.error_code)
        write_artifacts(args, response)
    except InputFormatError as e:
        logger.error(f"Invalid input: {e.message}")
        sys.stdout.write(canonical_json(create_error_response(e)))
        sys.exit(e.error_code)
    except KPError as e:
        sys.stdout.write(canonical_json(create_error_response(e)))
        sys.exit(e.error_code)
    except KeyboardInterrupt:
        logger.info("Interrupted, shutting down...")
        sys.exit(1)
    except Exception as e:
        logger.error(f"Fatal error: {e}", exc_info=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
