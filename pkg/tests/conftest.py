import pytest

from costparity.cost_model import canonical_schedule

# criterion id -> (description, passed)
ACCEPTANCE: dict[str, tuple[str, bool]] = {}


@pytest.fixture
def canonical():
    return canonical_schedule()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, description = marker.args
    key = f"AC{number:02d}"
    previous = ACCEPTANCE.get(key, (description, True))[1]
    ACCEPTANCE[key] = (description, previous and report.passed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        description, passed = ACCEPTANCE[key]
        terminalreporter.write_line(f"{key} {'PASS' if passed else 'FAIL'}  {description}")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, description): acceptance criterion")
