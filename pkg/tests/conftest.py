import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from linkanneal.network import make_network

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def fixnet():
    """Single link, r pinned to 1 and s to 0: unique solution 10."""
    return make_network(["r", "s"], [("r", "s")], fixes=[("r", 1), ("s", 0)])


@pytest.fixture
def contradiction():
    return make_network(["r", "s"], [("r", "s")], fixes=[("r", 0), ("s", 0)])


@pytest.fixture
def link_only():
    return make_network(["r", "s"], [("r", "s")])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance reporting: one PASS/FAIL line per criterion in the terminal summary

_RESULTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    details = "; ".join(f"{k}={v}" for k, v in item.user_properties)
    item.config.stash[_RESULTS].append((number, title, report.passed, details))


def pytest_terminal_summary(terminalreporter, config):
    results = sorted(config.stash.get(_RESULTS, []))
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, details in results:
        line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}"
        terminalreporter.write_line(line + (f"  ({details})" if details else ""))
