"""Shared fixtures: per-criterion bookkeeping for the acceptance suite."""

from collections import defaultdict

import pytest

_RESULTS = defaultdict(list)   # criterion -> [(test name, passed, notes)]
_NOTES = defaultdict(list)     # test nodeid -> lines recorded during the test


@pytest.fixture
def record(request):
    """Append a measured value to the acceptance summary of the current test."""
    def _record(text):
        _NOTES[request.node.nodeid].append(str(text))
    return _record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _RESULTS[marker.args[0]].append((item.name, rep.passed, _NOTES.get(item.nodeid, [])))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_RESULTS):
        parts = _RESULTS[n]
        ok = all(p for _, p, _ in parts)
        tr.write_line(f"criterion {n} [{'PASS' if ok else 'FAIL'}] "
                      f"({sum(p for _, p, _ in parts)}/{len(parts)} parts)")
        for name, passed, notes in parts:
            tr.write_line(f"    {'ok  ' if passed else 'FAIL'} {name}")
            for line in notes:
                tr.write_line(f"         {line}")
