import pytest


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if item.get_closest_marker("acceptance") and report.when == "call":
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        item.config._acceptance.append((doc, report.outcome))


def pytest_configure(config):
    config._acceptance = []


def pytest_terminal_summary(terminalreporter, config):
    if not config._acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for doc, outcome in config._acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {doc}")
