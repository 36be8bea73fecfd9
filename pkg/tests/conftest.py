import pathlib

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# numba warmup on first call makes per-example deadlines meaningless
settings.register_profile(
    "rrtlab",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("rrtlab")

ROOT = pathlib.Path(__file__).resolve().parent.parent

# one line per acceptance criterion, printed after the run so the verdicts
# survive pytest's output capture
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance gate")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def six_leaf_events():
    from rrtlab import CoalescentEvents

    text = (ROOT / "fixtures" / "six_leaf.json").read_text()
    return CoalescentEvents.from_json(text)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
