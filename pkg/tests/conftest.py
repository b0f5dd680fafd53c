"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""

import pytest

_OUTCOMES: dict[int, dict] = {}


def _criterion(item):
    mark = item.get_closest_marker("acceptance")
    return mark.kwargs if mark and "criterion" in mark.kwargs else None


@pytest.hookimpl(tryfirst=True)
def pytest_collection_modifyitems(items):
    # runs before -m/-k deselection, so every criterion test is counted
    for item in items:
        kw = _criterion(item)
        if kw:
            entry = _OUTCOMES.setdefault(kw["criterion"], {"title": kw.get("title", ""), "expected": 0, "results": []})
            entry["expected"] += 1


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    kw = _criterion(item)
    if kw and (report.when == "call" or (report.when == "setup" and not report.passed)):
        _OUTCOMES[kw["criterion"]]["results"].append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_OUTCOMES):
        entry = _OUTCOMES[num]
        results = entry["results"]
        if not all(results):
            status = "FAIL"
        elif not results:
            status = "NOT RUN"
        elif len(results) < entry["expected"]:
            status = f"INCOMPLETE ({len(results)} of {entry['expected']} checks ran)"
        else:
            status = "PASS"
        terminalreporter.write_line(f"criterion {num}: {status}  {entry['title']}")
