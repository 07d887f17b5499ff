"""
Pytest configuration file.

This file configures pytest to find the project modules and provides a few
points and parameters shared by several test modules.
"""

import sys
from pathlib import Path

import pytest

# Add the project root directory to the Python path
# This allows tests to import modules like 'config', 'bridge', 'core', etc.
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from core.grassmann import GrassmannPoint  # noqa: E402


@pytest.fixture
def tp_gr24():
    """Totally positive point of Gr(2,4) with Plücker vector (1, 1, 1, 1, 2, 1)."""
    return GrassmannPoint.from_rows([[1, 0, -1, -2], [0, 1, 1, 1]])


@pytest.fixture
def gr12():
    """The point [1, 1] of Gr(1,2)."""
    return GrassmannPoint.from_rows([[1, 1]])


@pytest.fixture
def generic_kappa4():
    """Kappas for n = 4 with distinct pair sums."""
    return [-3.0, -1.0, 0.5, 2.0]
