from __future__ import annotations

import re

_CRITERIA: dict = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    k = int(m.group(1))
    if report.when == "call" or report.failed or report.skipped:
        ok = report.passed if report.when == "call" else False
        _CRITERIA[k] = _CRITERIA.get(k, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if _CRITERIA[k] else 'FAIL'}")
