"""Shared pytest hooks: per-criterion verdict lines for the acceptance gate."""

from collections import defaultdict

import pytest

_CRITERIA = defaultdict(lambda: {"desc": "", "passed": 0, "failed": 0})


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(num, desc): tags a test as part of one numbered acceptance criterion",
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, desc = mark.args
    entry = _CRITERIA[num]
    entry["desc"] = desc
    if report.passed:
        entry["passed"] += 1
    else:
        entry["failed"] += 1


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        entry = _CRITERIA[num]
        if entry["failed"]:
            status = "FAIL"
        elif entry["passed"]:
            status = "PASS"
        else:
            status = "NOT RUN"
        terminalreporter.write_line(f"criterion {num}: {status}  {entry['desc']}")
