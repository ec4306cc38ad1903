import pytest
from hypothesis import HealthCheck, settings

from assouad_forge.scalar import DEFAULT_PRECISION, set_precision

settings.register_profile("repo", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

STAIRCASE = [("0.4", "0.6", "1"), ("0.9", "1.6", "0.5"), ("2.5", "3.1", "0")]


def pytest_runtest_setup(item):
    # every test starts from the library's default width, whatever the last one left behind
    set_precision(DEFAULT_PRECISION)


@pytest.fixture
def staircase_pieces():
    return list(STAIRCASE)


# -- acceptance criteria: one pass/fail line each in the terminal summary --

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): an acceptance criterion")


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    rep = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None and rep.when == "call":
        number, title = mark.args
        # an expected failure is still a failure of the criterion
        ok = rep.passed and not hasattr(rep, "wasxfail")
        _CRITERIA[number] = (title, ok, call.duration)
    return rep


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, secs = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}  ({secs:.3f} s)")
