import numpy as np
import pytest

from robin_ssn.mesh import build_unit_cube_mesh
from robin_ssn.pde import discretize
from robin_ssn.problems import X1_PLUS_X2SQ, manufactured, paper_example
from robin_ssn.ssn import ssn_solve


def pytest_addoption(parser):
    parser.addoption("--runlong", action="store_true", default=False, help="run long reproduction tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runlong"):
        return
    skip = pytest.mark.skip(reason="long test; pass --runlong")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def mesh1():
    return build_unit_cube_mesh(1)


@pytest.fixture(scope="session")
def mesh2():
    return build_unit_cube_mesh(2)


@pytest.fixture(scope="session")
def paper2(mesh2):
    return discretize(paper_example(), mesh2)


@pytest.fixture(scope="session")
def manuf2(mesh2):
    return discretize(manufactured(X1_PLUS_X2SQ, 1.0).problem, mesh2)


@pytest.fixture(scope="session")
def mixed1(mesh1):
    """n=1 data with nonzero state and mixed active/inactive sets at u = 0.5."""
    prob = manufactured(X1_PLUS_X2SQ, 1.0).problem.with_parameters(nu=0.01, alpha=1.0, beta=9.0)
    return discretize(prob, mesh1)


@pytest.fixture(scope="session")
def paper16_run():
    disc = discretize(paper_example(), build_unit_cube_mesh(16))
    return disc, ssn_solve(disc, np.zeros(disc.mesh.n_boundary))


@pytest.fixture(scope="session")
def paper8_run():
    disc = discretize(paper_example(), build_unit_cube_mesh(8))
    return disc, ssn_solve(disc, np.zeros(disc.mesh.n_boundary))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
