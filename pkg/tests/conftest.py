import numpy as np
import pytest
from hypothesis import settings

from gapgp.params import TOY_KERNEL, TOY_MECH, GreensConfig

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def toy():
    return TOY_KERNEL, TOY_MECH, GreensConfig(1.0, 10)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
