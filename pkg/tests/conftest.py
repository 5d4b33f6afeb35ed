import pytest

from fourthorder.harness import bundled_config_path, load_config, run_sweep

_REPORTS = {}


@pytest.fixture(scope="session")
def bundled_report():
    """Run a bundled configuration at its documented size, once per session."""

    def get(name):
        if name not in _REPORTS:
            _REPORTS[name] = run_sweep(load_config(bundled_config_path(name)))
        return _REPORTS[name]

    return get


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
