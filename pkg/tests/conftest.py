_criteria: dict[str, tuple[int, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, label): acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None:
            number, label = mark.args
            _criteria[item.nodeid] = (number, label, "NOT RUN")


def pytest_runtest_logreport(report):
    if report.nodeid not in _criteria:
        return
    number, label, status = _criteria[report.nodeid]
    if report.failed:
        status = "FAIL"
    elif report.when == "call" and report.passed and status != "FAIL":
        status = "PASS"
    _criteria[report.nodeid] = (number, label, status)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, label, status in sorted(_criteria.values()):
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {label}")
