import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from maxbell import StepFunction, TreeConfig

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@st.composite
def step_functions(draw, max_arity=4, max_depth=5):
    m = draw(st.integers(2, max_arity))
    d = draw(st.integers(0, max_depth))
    n = m**d
    vals = draw(
        st.lists(
            st.one_of(st.just(0.0), st.integers(0, 3).map(float), st.floats(0.0, 50.0, allow_nan=False)),
            min_size=n,
            max_size=n,
        )
    )
    if not any(v > 0 for v in vals):
        vals[0] = 1.0
    return StepFunction(TreeConfig(m, d), vals)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
