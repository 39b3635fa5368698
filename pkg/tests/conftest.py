import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("quick", max_examples=10, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session", autouse=True)
def isolated_cache(tmp_path_factory):
    """Each test session gets its own Gram cache directory."""
    path = tmp_path_factory.mktemp("gram-cache")
    old = os.environ.get("POLYBERGMAN_CACHE_DIR")
    os.environ["POLYBERGMAN_CACHE_DIR"] = str(path)
    yield path
    if old is None:
        os.environ.pop("POLYBERGMAN_CACHE_DIR", None)
    else:
        os.environ["POLYBERGMAN_CACHE_DIR"] = old


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def points_in_disk(radius: float):
    """Hypothesis strategy for complex numbers with modulus <= radius."""
    return st.tuples(st.floats(0, 1), st.floats(0, 2 * np.pi)).map(
        lambda t: complex(radius * np.sqrt(t[0]) * np.exp(1j * t[1])))


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
