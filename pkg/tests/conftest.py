import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from nctorus.algebra import AlgebraElement
from nctorus.lattice import ThetaMatrix

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

THETAS_2D = [0.0, 0.25, 1 / np.sqrt(2)]


@pytest.fixture(params=THETAS_2D, ids=["theta0", "theta1/4", "theta1/sqrt2"])
def theta2(request):
    return ThetaMatrix(2, [request.param])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# -- hypothesis strategies ---------------------------------------------------

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)


@st.composite
def thetas(draw, n=None):
    n = n or draw(st.integers(1, 3))
    upper = draw(st.lists(st.floats(-1, 1, allow_nan=False), min_size=n * (n - 1) // 2,
                          max_size=n * (n - 1) // 2))
    return ThetaMatrix(n, upper)


@st.composite
def elements(draw, theta, radius=2, max_terms=6):
    n = theta.n
    idx = st.tuples(*[st.integers(-radius, radius)] * n)
    coeffs = draw(st.dictionaries(idx, cplx, min_size=1, max_size=max_terms))
    return AlgebraElement(theta, coeffs, radius)


# -- acceptance summary ---------------------------------------------------------

ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
