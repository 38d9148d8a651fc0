"""Shared pytest wiring: a per-criterion summary for the acceptance gate."""

import pytest

_acceptance_reports = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and "test_acceptance.py" in item.nodeid:
        _acceptance_reports[item.nodeid] = rep


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_reports:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_acceptance_reports):
        rep = _acceptance_reports[nodeid]
        name = nodeid.split("::")[-1]
        if hasattr(rep, "wasxfail"):
            word = "XFAIL" if rep.skipped else "XPASS"
        elif rep.passed:
            word = "PASS"
        elif rep.failed:
            word = "FAIL"
        else:
            word = rep.outcome.upper()
        terminalreporter.write_line(f"{word:5s}  {name}")
