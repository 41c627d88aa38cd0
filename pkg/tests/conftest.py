import numpy as np
import pytest
from hypothesis import strategies as st

from ousheet.model import CovarianceParams, MonotoneDesign


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def make_design(d, delta, origin=(1.0, 1.0)):
    return MonotoneDesign(origin, np.asarray(d, float), np.asarray(delta, float))


@st.composite
def monotone_designs(draw, min_n=2, max_n=10, low=0.05, high=2.0):
    n = draw(st.integers(min_n, max_n))
    inc = st.floats(low, high, allow_nan=False, allow_infinity=False)
    d = draw(st.lists(inc, min_size=n - 1, max_size=n - 1))
    delta = draw(st.lists(inc, min_size=n - 1, max_size=n - 1))
    return make_design(d, delta)


@st.composite
def covariance_params(draw, low=0.2, high=5.0):
    rate = st.floats(low, high, allow_nan=False, allow_infinity=False)
    return CovarianceParams(draw(rate), draw(rate))


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
