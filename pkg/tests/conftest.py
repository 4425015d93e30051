import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call" and report.passed:
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, {"title": title, "passed": True, "seconds": 0.0})
    entry["passed"] &= report.passed
    entry["seconds"] += report.duration


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "PASS" if entry["passed"] else "FAIL"
        terminalreporter.write_line(
            f"criterion {number:2d} {status}  {entry['title']}  ({entry['seconds']:.1f} s)")
