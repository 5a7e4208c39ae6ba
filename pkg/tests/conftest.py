import numpy as np
import pytest

from gauged_reduce.checks import make_rng
from gauged_reduce.scenarios import get_scenario

SCENARIOS = ["so3_r3", "hopf", "calogero_so3", "so5_pairs"]


@pytest.fixture
def rng():
    return make_rng(42)


@pytest.fixture(params=SCENARIOS)
def scenario(request):
    return get_scenario(request.param)


def rodrigues(axis, angle):
    """Rotation matrix about ``axis`` by ``angle``, independent of the algebra code."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    K = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    def log(number, passed, text):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {text}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return log


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
