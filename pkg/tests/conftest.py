import numpy as np
import pytest
from hypothesis import settings

from tline.scenario import Scenario

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

STATES = ("texas", "california", "michigan", "florida")


@pytest.fixture(scope="session")
def texas():
    return Scenario.load("texas", env={})


@pytest.fixture(scope="session")
def small_model(texas):
    # coarse mesh, short horizon: cheap enough for many calls
    return texas.build_model(n_elements=40, n_steps=200)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for num in sorted(REPORT):
            terminalreporter.write_line(REPORT[num])
