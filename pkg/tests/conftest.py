import numpy as np
import pytest

from lagglue.glue import build_glued_surface
from lagglue.grim import RigidMotionSpec, build_configuration
from lagglue.reduced import build_reduced_mesh

EQUAL_ANGLE = (np.pi / 4, np.pi / 4, np.pi / 2)


@pytest.fixture(scope="session")
def config():
    return build_configuration([RigidMotionSpec(EQUAL_ANGLE, 0.0)])


@pytest.fixture(scope="session")
def surface(config):
    return build_glued_surface(config, 0.05)


@pytest.fixture(scope="session")
def reduced_mesh(surface):
    return build_reduced_mesh(surface)


ACCEPTANCE = {}


@pytest.fixture(scope="session")
def acceptance():
    """Registry of criterion outcomes; ``record(n, passed, detail)`` also prints the line."""

    def record(n, passed, detail):
        line = f"CRITERION {n:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE[n] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
