"""Collects acceptance outcomes so the run ends with one PASS/FAIL line per criterion."""
from collections import OrderedDict

_criteria = {}
_outcomes = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by this test")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            num, title = m.args
            _criteria[item.nodeid] = num
            _outcomes.setdefault(num, {"title": title, "ok": True, "ran": False})
    for num in sorted(_outcomes):
        _outcomes.move_to_end(num)


def pytest_runtest_logreport(report):
    num = _criteria.get(report.nodeid)
    if num is None:
        return
    entry = _outcomes[num]
    if report.when == "call" or report.failed:
        entry["ran"] = True
    if report.failed:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for num, entry in _outcomes.items():
        if not entry["ran"]:
            status = "SKIP"
        else:
            status = "PASS" if entry["ok"] else "FAIL"
        terminalreporter.write_line(f"{status}  criterion {num:>2}: {entry['title']}")
