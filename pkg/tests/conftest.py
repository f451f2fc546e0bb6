import math

import numpy as np
import pytest

from nearfocus.analysis import cai_map
from nearfocus.geometry import IrsPanel, Scene, default_region, default_scene

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def scene():
    return default_scene()


@pytest.fixture(scope="session")
def small_scene():
    """20x20 panel, handy where the full 6400 elements would be slow."""
    return default_scene(rows=20, cols=20)


@pytest.fixture(scope="session")
def region():
    return default_region()


@pytest.fixture(scope="session")
def default_cai_map(scene, region):
    return cai_map(scene, region, 40, 40)


@pytest.fixture
def toy_scene():
    return Scene(IrsPanel(2, 2, 0.01), 28e9, (0.1, 0.8, -0.05), 0.5, 1e-11)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
