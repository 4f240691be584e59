import numpy as np
import pytest

from fracflow import ProblemData, Rectangle, build_mesh, build_space

DOMAIN = Rectangle(0.0, 2.0, 0.0, 1.0)

_acceptance_lines = []


def record_acceptance(line: str):
    _acceptance_lines.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def mesh42():
    return build_mesh(DOMAIN, 1.0, 4, 2)


@pytest.fixture(scope="session")
def space42(mesh42):
    return build_space(mesh42)


@pytest.fixture(scope="session")
def space84():
    return build_space(build_mesh(DOMAIN, 1.0, 8, 4))


@pytest.fixture
def forch_data():
    return ProblemData.uniform(alpha=1.0, beta=1.0, beta_gamma=1.0, kappa=0.5, xi=0.75)
