"""Shared oracles and the acceptance summary printed at the end of a run."""

import mpmath as mp
import pytest

mp.mp.dps = 50

ACCEPTANCE = {}


def record(criterion, passed, detail):
    """Store one acceptance line; test_acceptance calls this before asserting."""
    ACCEPTANCE[criterion] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  criterion {key}: {detail}")


def log_p_oracle(a, x):
    """ln P(a, x) in extended precision, using the upper tail when P is near 1."""
    a, x = mp.mpf(a), mp.mpf(x)
    if x > a:
        return mp.log1p(-mp.gammainc(a, x, mp.inf, regularized=True))
    return mp.log(mp.gammainc(a, 0, x, regularized=True))


@pytest.fixture
def oracle():
    return mp
