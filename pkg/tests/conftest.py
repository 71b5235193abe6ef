import numpy as np
import pytest
from hypothesis import strategies as st

from fiscaleq.model import SCENARIO_A, SCENARIO_B, ScenarioConfig, validate


@pytest.fixture
def scenario_a():
    return validate(SCENARIO_A)


@pytest.fixture
def scenario_b():
    return validate(SCENARIO_B)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def lambda_positive_scenario():
    """Large purchase, tiny fixed input, high risk aversion: threshold above zero."""
    return validate(SCENARIO_B.with_values(alpha=5.0, tau=0.5, F=0.01, g=5.0))


def _level(lo, hi):
    # Exact zero or a value well clear of the subnormal range.
    return st.one_of(st.just(0.0), st.floats(lo, hi))


@st.composite
def scenarios(draw, g_zero=None):
    """Admissible scenarios spanning the documented sampling box."""
    N = draw(st.floats(2.0, 100.0))
    m = draw(st.floats(0.1, 5.0))
    alpha = N * m * draw(st.floats(0.01, 0.95))
    F = draw(_level(1e-6, 2.0))
    tau = draw(st.floats(0.05, 0.95))
    g = 0.0 if g_zero else draw(_level(1e-6, 5.0) if g_zero is None else st.floats(0.01, 5.0))
    Lg = draw(_level(1e-6, 20.0))
    w = draw(st.floats(0.1, 10.0))
    if F == 0 and g == 0 and Lg == 0:
        F = 1.0
    return validate(ScenarioConfig.from_flat(
        dict(N=N, m=m, F=F, alpha=alpha, kappa=1.0, k=0.0, w=w, g=g, tau=tau, Lg=Lg)))
