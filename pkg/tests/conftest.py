"""Collects the outcome of tests marked ``criterion`` into one summary line each."""

import pytest

_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    key = tuple(mark.args)
    _outcomes[key] = _outcomes.get(key, True) and rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), ok in sorted(_outcomes.items()):
        terminalreporter.write_line(f"criterion {number} [PRIMARY] {title}: {'PASS' if ok else 'FAIL'}")
