"""Acceptance-criterion recording and the end-of-run summary."""

import contextlib

import pytest

# (number, label, status) triples recorded through the criterion fixture
ACCEPTANCE_RESULTS: list = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, label, status in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"criterion {number} [{status}] {label}")


@pytest.fixture
def criterion():
    """Context manager recording one PASS/FAIL line per criterion."""

    @contextlib.contextmanager
    def record(number: int, label: str):
        try:
            yield
        except BaseException:
            ACCEPTANCE_RESULTS.append((number, label, "FAIL"))
            print(f"[criterion {number}] FAIL {label}")
            raise
        ACCEPTANCE_RESULTS.append((number, label, "PASS"))
        print(f"[criterion {number}] PASS {label}")

    return record
