import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lfblood.model import make_vessel_params

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def params():
    """Baseline vessel: A0=6.6 cm^2, E=2.43e6, h0=0.26, nu=0.5, rho=1.06."""
    return make_vessel_params(E=2.43e6, h0=0.26, nu=0.5, A0=6.6, rho=1.06, length=200.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- acceptance summary ---------------------------------------------------------

_CRITERIA = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_CRITERIA] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or not (rep.when == "call" or rep.failed):
        return
    detail = dict(item.user_properties).get("detail", "")
    item.config.stash[_CRITERIA].append(
        (marker.args[0], marker.args[1], "PASS" if rep.passed else "FAIL", detail))


def pytest_terminal_summary(terminalreporter, config):
    rows = sorted(config.stash.get(_CRITERIA, []), key=lambda r: r[0])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status, detail in rows:
        line = f"{status} criterion {number:>2}: {title}"
        terminalreporter.write_line(f"{line} | {detail}" if detail else line)
