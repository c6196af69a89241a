import pytest

from pvfree import default_scheme


@pytest.fixture(scope="session")
def scheme():
    return default_scheme()


ACCEPTANCE_LINES = []


@pytest.fixture
def report_criterion():
    """Record one summary line per acceptance criterion; printed at session end."""
    def record(number, passed, detail, seconds):
        ACCEPTANCE_LINES.append((number, f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}"
                                         f"  {detail}  ({seconds:.2f} s)"))
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
