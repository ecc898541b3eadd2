import os
import time

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=200, deadline=None)
settings.register_profile("ci", max_examples=1000, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

SUITE_BUDGET_S = 300.0
_started = time.monotonic()
_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    key = marker.args[0]
    ok = report.passed or (report.when == "setup" and not report.failed)
    prev = _criteria.get(key, (marker.args[1], True))
    if report.when == "call" or not ok:
        _criteria[key] = (prev[0], prev[1] and ok)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    elapsed = time.monotonic() - _started
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(_criteria, key=str):
        title, ok = _criteria[key]
        tr.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {title}")
    budget_ok = elapsed < SUITE_BUDGET_S
    tr.write_line(
        f"criterion 9 (runtime): {'PASS' if budget_ok else 'FAIL'}  "
        f"suite finished in {elapsed:.1f}s (budget {SUITE_BUDGET_S:.0f}s)"
    )


def pytest_sessionfinish(session, exitstatus):
    if _criteria and time.monotonic() - _started >= SUITE_BUDGET_S and exitstatus == 0:
        session.exitstatus = 1
