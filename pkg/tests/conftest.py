"""Shared fixtures plus the acceptance-criterion scoreboard.

Tests tagged ``@pytest.mark.criterion(n, "...")`` feed a summary block
that prints one PASS/FAIL line per criterion at the end of the run.
"""

import pytest

from stochmatch.graph import Graph

_MARKED = {}
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(num, desc): ties a test to an acceptance criterion"
    )


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            _MARKED[item.nodeid] = marker.args


def pytest_runtest_logreport(report):
    args = _MARKED.get(report.nodeid)
    if args is None:
        return
    num, desc = args
    entry = _CRITERIA.setdefault(num, {"desc": desc, "passed": 0, "failed": 0})
    if report.when == "call" and report.passed:
        entry["passed"] += 1
    elif report.failed or report.skipped:
        entry["failed"] += 1


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        entry = _CRITERIA[num]
        verdict = "PASS" if entry["failed"] == 0 and entry["passed"] > 0 else "FAIL"
        terminalreporter.write_line(
            f"criterion {num:2d}: {verdict} - {entry['desc']}"
        )


@pytest.fixture
def triangle():
    return Graph.build(3, [(0, 1, 0.5), (0, 2, 0.5), (1, 2, 0.5)])


@pytest.fixture
def path3():
    return Graph.build(4, [(0, 1, 0.5), (1, 2, 0.5), (2, 3, 0.5)])
