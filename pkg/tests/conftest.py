import numpy as np
import pytest

from tdavg.core import SystemState
from tdavg.integrate import IntegratorConfig, full_system, integrate_until_H
from tdavg.models import DEFAULT_INITIAL_STATES, bianchi3, van_der_pol

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


@pytest.fixture(scope="session")
def bianchi():
    return bianchi3()


@pytest.fixture(scope="session")
def vdp():
    return van_der_pol()


@pytest.fixture(scope="session")
def bianchi_state():
    return DEFAULT_INITIAL_STATES["bianchi3"]


@pytest.fixture(scope="session")
def bianchi_full(bianchi, bianchi_state):
    """Default Bianchi III run until H = 0.02."""
    return integrate_until_H(full_system(bianchi), bianchi_state, 0.02, IntegratorConfig())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_bianchi_points(rng, n):
    """Uniform samples of the admissible (Sigma_+, Omega) region with random phase."""
    pts = []
    while len(pts) < n:
        sig = rng.uniform(-0.99, 0.99)
        om = rng.uniform(0.01, 0.99)
        if 1 - sig * sig - om > 1e-3:
            pts.append([sig, om, rng.uniform(-np.pi, np.pi)])
    return np.array(pts)


def zero_state(x, H=1.0, t=0.0):
    return SystemState(H=H, x=x, t=t)


RECORDED_RUNS = []


def pytest_configure(config):
    import tdavg.analysis as analysis

    original = analysis._run_window

    def recording(*args, **kwargs):
        run = original(*args, **kwargs)
        RECORDED_RUNS.append(run)
        return run

    analysis._run_window = recording


def pytest_collection_modifyitems(items):
    # acceptance last, so its invariant sweep sees every comparison run of the session
    items.sort(key=lambda item: "test_acceptance" in item.nodeid)


@pytest.fixture(scope="session")
def recorded_runs():
    return RECORDED_RUNS
