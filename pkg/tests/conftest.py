from __future__ import annotations

import pytest

from heisenberg_cf.schedules import build_asymmetric, build_infinite

#: (criterion, passed, detail) lines recorded by the acceptance module
ACCEPTANCE_LINES: list[tuple[int, bool, str]] = []


@pytest.fixture(scope="session")
def asym():
    return build_asymmetric(10)


@pytest.fixture(scope="session")
def infinite6():
    return build_infinite(6)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
