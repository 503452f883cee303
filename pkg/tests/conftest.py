import pytest


def pytest_addoption(parser):
    parser.addoption("--heavy", action="store_true", default=False, help="run heavy checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--heavy"):
        return
    skip = pytest.mark.skip(reason="heavy check; enable with --heavy")
    for item in items:
        if "heavy" in item.keywords:
            item.add_marker(skip)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for ln in ACCEPTANCE_LINES:
            terminalreporter.write_line(ln)
