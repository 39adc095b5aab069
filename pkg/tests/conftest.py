import pytest

from coexist.model import reference_scenario

# filled by test_acceptance.py, printed after the run
ACCEPTANCE_LINES = []


@pytest.fixture
def ref():
    """Reference parameters at m = 5 (lambda_w / lambda_s = 3)."""
    return reference_scenario(channels=5, ratio=3.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
