import numpy as np
import pytest

from isingmarket.market import MarketConfig, NoiseSpec, CouplingSchedule

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_config():
    return MarketConfig(
        n_agents=50,
        horizon=200,
        seed=7,
        coupling=CouplingSchedule.constant(1.0),
        noise=NoiseSpec(price_sigma=0.01),
    )


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
