import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_criteria: dict[int, tuple[str, str, float]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.user_properties.append(("criterion", m.args))


def pytest_runtest_logreport(report):
    args = dict(report.user_properties).get("criterion")
    if args is None:
        return
    number, label = args
    if report.when == "call" or report.outcome != "passed":
        status = "PASS" if report.outcome == "passed" else "FAIL"
        _criteria[number] = (label, status, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        label, status, duration = _criteria[number]
        terminalreporter.write_line(f"[{status}] criterion {number}: {label} ({duration:.2f} s)")
