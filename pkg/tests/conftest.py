from __future__ import annotations

import pytest

from aitlab.enumeration import Budget, enumerate_programs, enumerate_with_oracle

ORACLE_PREFIX = 64


@pytest.fixture(scope="session")
def table_12():
    return enumerate_programs(Budget(12, 1_000))


@pytest.fixture(scope="session")
def table_14():
    return enumerate_programs(Budget(14, 1_000))


@pytest.fixture(scope="session")
def desk():
    """The desk budget used by most experiments: L=16, T=10^4."""
    return enumerate_programs(Budget(16, 10_000))


@pytest.fixture(scope="session")
def desk_h(desk):
    return enumerate_with_oracle(desk, ORACLE_PREFIX)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
