import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_OUTCOMES = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    name = marker.args[0]
    if report.when == "call" or (report.when == "setup" and not report.passed):
        if report.skipped:
            _OUTCOMES[name] = "SKIP"
        else:
            _OUTCOMES[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict in _OUTCOMES.items():
        terminalreporter.write_line(f"{verdict}  {name}")
