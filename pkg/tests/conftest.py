import numpy as np
import pytest

from qsimpson.optimizer import ScenarioParameterization

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when not in ("setup", "call"):
        return
    n, title = marker.args
    failed = call.excinfo is not None
    prev = _criteria.get(n, (title, True))
    if call.when == "call" or failed:
        _criteria[n] = (title, prev[1] and not failed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, ok = _criteria[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}")


def random_scenario(rng, dim, ranks=None):
    if ranks is None:
        ranks = tuple(int(r) for r in rng.integers(0, dim + 1, 3))
    return ScenarioParameterization.random(dim, ranks, rng).decode()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
