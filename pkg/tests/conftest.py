"""Collects results of tests marked ``criterion`` and prints one line per criterion."""

import pytest

_results: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _results.setdefault(number, {"title": title, "passed": 0, "failed": [], "skipped": [], "time": 0.0})
    if report.when == "call":
        entry["time"] += report.duration
        if report.passed:
            entry["passed"] += 1
        elif report.failed:
            entry["failed"].append(item.name)
    if report.skipped:
        entry["skipped"].append(item.name)
    elif report.failed and report.when != "call":
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        r = _results[number]
        if r["failed"]:
            status = "FAIL"
        elif r["skipped"] and not r["passed"]:
            status = "SKIP"
        else:
            status = "PASS"
        detail = f"{r['passed']} checks, {r['time']:.1f}s"
        if r["failed"]:
            detail += "; failed: " + ", ".join(r["failed"])
        if r["skipped"]:
            detail += "; skipped: " + ", ".join(r["skipped"])
        terminalreporter.write_line(f"criterion {number} {status}: {r['title']} ({detail})")
