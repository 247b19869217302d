"""Shared fixtures: variance maps reused across test modules."""

import pytest

from holosim import ArrayGeometry, variance_map


@pytest.fixture(scope="session")
def map_l4():
    """49-cell map of a 12x12 surface at one-third-wavelength pitch."""
    return variance_map(ArrayGeometry(12, 12, 1 / 3))


@pytest.fixture(scope="session")
def rx_map_small():
    """13-cell map of a 6x6 surface at one-third-wavelength pitch."""
    return variance_map(ArrayGeometry(6, 6, 1 / 3))


@pytest.fixture(scope="session")
def tx_map_medium():
    """69-cell map of a 14x14 surface at one-third-wavelength pitch."""
    return variance_map(ArrayGeometry(14, 14, 1 / 3))
