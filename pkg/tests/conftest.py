"""Pytest configuration and fixtures."""

import numpy as np
import pytest

from chgsim.core.logger import setup_logger
from chgsim.services.coefficients import CoefficientSet, get_scalar_field, get_vector_field
from chgsim.services.grid import CellField, make_grid
from chgsim.services.potential import make_potential
from chgsim.services.solver import system_cache
from chgsim.services.sources import SourceData

setup_logger(level="WARNING", fmt="console")


@pytest.fixture(autouse=True)
def clear_system_cache():
    """Each test starts with an empty factorisation cache."""
    system_cache.clear()
    yield
    system_cache.clear()


# =====================================
# GRID FIXTURES
# =====================================


@pytest.fixture
def grid_1d():
    return make_grid(1, [1.0], [32])


@pytest.fixture
def grid_2d():
    return make_grid(2, [1.0, 1.0], [12, 12])


# =====================================
# MODEL FIXTURES
# =====================================


@pytest.fixture
def coeffs_1d():
    """beta = 1, a = c = 0, b = 1."""
    return CoefficientSet(
        beta=1.0,
        a=get_vector_field("constant", values=[0.0]),
        c=get_vector_field("constant", values=[0.0]),
        b=get_scalar_field("constant", value=1.0),
    )


@pytest.fixture
def coeffs_2d():
    """Divergence-free tangential vortex fields with a positive margin."""
    return CoefficientSet(
        beta=1.0,
        a=get_vector_field("vortex", omega=0.2),
        c=get_vector_field("vortex", omega=0.1),
        b=get_scalar_field("constant", value=1.0),
    )


@pytest.fixture
def double_well():
    return make_potential("double_well")


@pytest.fixture
def zero_data():
    return SourceData.zero()


@pytest.fixture
def cosine_psi_1d(grid_1d):
    x = grid_1d.cell_centers()[0]
    return CellField(grid_1d, 0.3 * np.cos(np.pi * x))


@pytest.fixture
def cosine_psi_2d(grid_2d):
    x, y = grid_2d.cell_centers()
    return CellField(grid_2d, 0.2 * np.cos(np.pi * x) + 0.1 * np.cos(np.pi * y))


# =====================================
# CONFIG FIXTURES
# =====================================


@pytest.fixture
def simulate_config_text():
    """Small 1D run that finishes in a few steps."""
    return (
        "[grid]\n"
        "dimension = 1\n"
        "extents = 1.0\n"
        "cells = 16\n"
        "\n"
        "[coefficients]\n"
        "beta = 1.0\n"
        "b = 1.0\n"
        "\n"
        "[potential]\n"
        "kind = double_well\n"
        "\n"
        "[time]\n"
        "tau = 0.01\n"
        "steps = 5\n"
        "\n"
        "[initial]\n"
        "psi0 = cosine(mean=0.0, amplitude=0.2, mode=1)\n"
    )


@pytest.fixture
def config_file(tmp_path, simulate_config_text):
    path = tmp_path / "run.cfg"
    path.write_text(simulate_config_text, encoding="utf-8")
    return path
