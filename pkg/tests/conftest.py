import pytest

_outcomes: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    if report.when == "call" or report.failed:
        verdict = "PASS" if report.passed else "FAIL"
        prev = _outcomes.get(number)
        # a failure in any phase sticks
        if prev is None or prev[0] == "PASS":
            _outcomes[number] = (verdict, title)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        verdict, title = _outcomes[number]
        terminalreporter.write_line(f"{verdict} criterion {number}: {title}")
