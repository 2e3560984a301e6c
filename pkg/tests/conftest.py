import numpy as np
import pytest

from rumorsource.graph import from_edge_list


@pytest.fixture
def triangle():
    return from_edge_list([(0, 1), (1, 2), (2, 0)])


@pytest.fixture
def path3():
    return from_edge_list([(0, 1), (1, 2)])


@pytest.fixture
def bowtie():
    # two triangles sharing node 2
    return from_edge_list([(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
