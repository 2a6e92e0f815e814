import numpy as np
import pytest

from levysymp import LevyConfig, LevyPath

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def make_path():
    """Build a one-channel path on [0, horizon] from ``(time, size)`` pairs."""

    def build(jumps=(), horizon=20.0, channels=1):
        cfg = LevyConfig(horizon=horizon, channels=channels)
        if channels == 1:
            jumps = [list(jumps)]
        return LevyPath.from_jumps(cfg, jumps)

    return build


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
