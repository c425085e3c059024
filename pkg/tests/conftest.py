import sys

import numpy as np
import pytest

from choquard.kernel import BallSpec, Dimension
from choquard.shooting import solve_ball, whole_space_ground_state

@pytest.fixture(scope="session")
def ball3_5():
    return BallSpec(Dimension(3), 5.0)


@pytest.fixture(scope="session")
def gs3_5(ball3_5):
    return solve_ball(ball3_5)


@pytest.fixture(scope="session")
def gs3_inf():
    return whole_space_ground_state(3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda text: text.split("]")[0].split("[")[1]):
            terminalreporter.write_line(line)
