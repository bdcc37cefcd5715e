"""One line per acceptance criterion, printed with its verdict.

The lines are repeated in the terminal summary of every pytest run.
"""
from __future__ import annotations

import pytest

from foldsaddle.cli.verify import ACCEPTANCE, format_result

REPORT: list[str] = []


@pytest.mark.parametrize("check", ACCEPTANCE, ids=[c.__name__.removeprefix("check_") for c in ACCEPTANCE])
def test_criterion(check):
    result = check(0)
    line = format_result(result)
    REPORT.append(line)
    print(line)
    assert result.passed, result.detail
