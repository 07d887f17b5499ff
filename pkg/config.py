"""
Configuration module for kpsolitons.

This module defines constants, tolerances and settings used throughout the project.
Values that users commonly tune (the zero tolerance for minors) can be overridden
through the environment or a ``.env`` file in the working directory.
"""

import os
import logging
from typing import Dict, Any

from dotenv import load_dotenv

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

# Pick up KP_TOL and friends from a local .env if one exists
load_dotenv()

# Zero tolerance for minors, relative to max |Delta|
DEFAULT_TOL = 1e-9
TOL_ENV_VAR = "KP_TOL"

# Values in (tol, AMBIGUOUS_FACTOR * tol) * max are neither zero nor safely nonzero
AMBIGUOUS_FACTOR = 10.0

# Absolute/relative tolerance used by the contour geometry (merging points, ties)
GEOMETRY_TOL = 1e-9

# Canonical JSON output
JSON_SIGNIFICANT_DIGITS = 12
JSON_INDENT = 2

# Automatic "t << 0" selection
AUTO_TIME: Dict[str, Any] = {
    "start": -1.0,
    "factor": 2.0,
    "max_steps": 12,
}

# Contour plot bounding box policy
BBOX: Dict[str, float] = {
    "expand": 0.2,              # relative growth of the vertex bounding box
    "margin": 1.0,              # absolute margin added on every side
    "provisional_scale": 1e4,   # first-pass box half-width per unit of coefficient size
}

# Inverse solver
INVERSE: Dict[str, Any] = {
    "seeds": (0, 1, 2, 3, 4, 5, 6, 7),
    "max_nfev": 2000,
    "bound": 60.0,        # box bound on log-parameters
    "cycle_tol": 1e-6,    # relative tolerance of cycle sums
    "ratio_tol": 1e-6,    # acceptance of forward re-check
    "cost_tol": 1e-12,
}

# Realisation search for psi(T)
REALIZATION: Dict[str, Any] = {
    "times": tuple(float(t) for t in range(-10, 11)),
    "log_scales": (2.0, 4.0, 8.0),
}

# Fixed SVG styling so figures are diff-able
SVG: Dict[str, Any] = {
    "hashsalt": "kpsolitons",
    "figsize": (6.0, 6.0),
    "edge_color": "black",
    "edge_width": 1.2,
    "font_size": 7,
    "label_font_size": 6,
    "vertex_size": 28,
    "palette": ("#f2f0f7", "#dadaeb", "#bcbddc", "#c6dbef", "#deebf7",
                "#e5f5e0", "#fee6ce", "#fdd0a2", "#fcbba1", "#efedf5"),
}

# CLI settings
CLI_DEFAULT_VERBOSE = False
PROTOCOL_VERSION = "1.0.0"


def tolerance() -> float:
    """
    Return the effective zero tolerance.

    The value of ``KP_TOL`` wins over ``DEFAULT_TOL`` when it is set.

    Returns:
        float: Non-negative tolerance relative to max |Delta|.

    Raises:
        InputFormatError: If ``KP_TOL`` is not a non-negative number.
    """
    raw = os.getenv(TOL_ENV_VAR)
    if raw is None or raw.strip() == "":
        return DEFAULT_TOL
    try:
        value = float(raw)
    except ValueError as e:
        from core.errors import InputFormatError
        raise InputFormatError(f"{TOL_ENV_VAR} is not a number: {raw!r}") from e
    if value < 0:
        from core.errors import InputFormatError
        raise InputFormatError(f"{TOL_ENV_VAR} must be non-negative, got {value}")
    return value
