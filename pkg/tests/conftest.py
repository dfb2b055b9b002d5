from __future__ import annotations

import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

CRITERIA = {}
CRITERIA_RUN = set()


@pytest.fixture
def criterion(request):
    """Record the outcome of an acceptance criterion; returns the pass flag."""

    def record(num: int, passed: bool, detail: str = "") -> bool:
        CRITERIA[num] = (bool(passed), detail)
        print(f"criterion {num}: {'PASS' if passed else 'FAIL'}  {detail}")
        return bool(passed)

    return record


def pytest_runtest_logreport(report):
    if "test_acceptance" in report.nodeid and report.when == "call":
        CRITERIA_RUN.add(report.nodeid)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA_RUN:
        return
    terminalreporter.section("acceptance criteria")
    for num in range(1, 10):
        passed, detail = CRITERIA.get(num, (False, "not reached"))
        terminalreporter.write_line(f"criterion {num}: {'PASS' if passed else 'FAIL'}  {detail}")
