import numpy as np
import pytest

from sca_kit import GibbsConfig


@pytest.fixture
def fast_cfg():
    return GibbsConfig(n_sweeps=120, burn_in=60)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
