import numpy as np
import pytest

from infotrade import CashFlowSpec, DiscountCurve, InformedParams, TimeGrid


@pytest.fixture
def spec3():
    # three-level recovery payout
    return CashFlowSpec((0.0, 0.5, 1.0), (0.1, 0.15, 0.75))


@pytest.fixture
def digital():
    return CashFlowSpec((0.0, 1.0), (0.2, 0.8))


@pytest.fixture
def informed():
    return InformedParams(0.45, 0.15)


@pytest.fixture
def flat5():
    return DiscountCurve.flat(0.05)


@pytest.fixture
def grid5():
    return TimeGrid(5.0, 1000)


def zscore(est, target, se):
    return np.abs(np.asarray(est) - target) / np.asarray(se)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
