import pytest

from ranlab.stochastics import make_rng

ACCEPTANCE_LINES: list = []


@pytest.fixture
def rng():
    return make_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
