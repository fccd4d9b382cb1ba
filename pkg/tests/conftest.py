"""Acceptance bookkeeping: one PASS/FAIL line per numbered criterion.

Tests tagged ``@pytest.mark.acceptance(n, "title")`` feed the summary; the
``measured`` fixture attaches the observed number to the line.
"""
import pytest

_RESULTS = {}


@pytest.fixture
def measured(request):
    def note(text):
        request.node.user_properties.append(("measured", text))
    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    entry = _RESULTS.setdefault(number, {"title": title, "ok": True, "ran": False, "notes": []})
    if report.when == "call" or report.failed:
        entry["ran"] = entry["ran"] or report.when == "call"
        entry["ok"] = entry["ok"] and report.passed
    if report.when == "call":
        entry["notes"] += [v for k, v in item.user_properties if k == "measured"]


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        entry = _RESULTS[number]
        status = "PASS" if entry["ok"] and entry["ran"] else "FAIL"
        detail = "; ".join(entry["notes"])
        line = f"[{status}] {number:2d}. {entry['title']}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
