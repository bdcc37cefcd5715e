from __future__ import annotations

import math

import pytest

from foldsaddle import make_system

# lam, alpha, beta of the symmetric single-cycle configuration
SINGLE_CYCLE = (-0.5 + 11.0 * math.sqrt(6.0) / 60.0, -1.0, 0.5)
SINGLE_CYCLE_X = -math.sqrt(29.0 / 2.0) / 10.0


@pytest.fixture
def single_cycle_system():
    return make_system("inv", *SINGLE_CYCLE)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
