import pytest

from neumann_peaks.ground_state import solve_ground_state
from neumann_peaks.params import SystemParams


@pytest.fixture(scope="session")
def params_n6():
    return SystemParams.create(6, 2.0)


@pytest.fixture(scope="session")
def params_n5():
    return SystemParams.create(5, 7 / 3)


@pytest.fixture(scope="session")
def params_n5_off():
    return SystemParams.create(5, 2.2)


@pytest.fixture(scope="session")
def profile_n6(params_n6):
    return solve_ground_state(params_n6)


@pytest.fixture(scope="session")
def profile_n5(params_n5):
    return solve_ground_state(params_n5)


@pytest.fixture(scope="session")
def profile_n5_off(params_n5_off):
    return solve_ground_state(params_n5_off)


ACCEPTANCE_LINES: dict = {}


@pytest.fixture
def record_criterion():
    def record(number, passed, text):
        ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {text}"
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
