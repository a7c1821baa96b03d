import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from lambdipole.fields import HalfPlaneGrid  # noqa: E402
from lambdipole.lamb import LambParams, sample_lamb  # noqa: E402

# filled by test_acceptance.py, printed at the end of the session
ACCEPTANCE: dict[int, str] = {}


@pytest.fixture(scope="session")
def lamb1():
    return LambParams(1.0, 1.0)


@pytest.fixture(scope="session")
def grid128():
    return HalfPlaneGrid(-8.0, 8.0, 8.0, 128, 128)


@pytest.fixture(scope="session")
def lamb128(lamb1, grid128):
    return sample_lamb(lamb1, grid128)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
