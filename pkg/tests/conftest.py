from collections import defaultdict

import pytest

from mproots.numerics import Precision

_ACCEPTANCE = defaultdict(list)


class AcceptanceRecorder:
    """Collects per-row outcomes so the summary can print one line per criterion."""

    def __init__(self, store):
        self.store = store

    def check(self, criterion, ok, detail):
        self.store[criterion].append((bool(ok), detail))
        assert ok, f"criterion {criterion}: {detail}"


@pytest.fixture
def acceptance():
    return AcceptanceRecorder(_ACCEPTANCE)


@pytest.fixture(scope="session")
def p60():
    return Precision(60)


@pytest.fixture(scope="session")
def p1000():
    return Precision(1000)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for criterion in sorted(_ACCEPTANCE, key=lambda c: (int(c.split()[0]), c)):
        rows = _ACCEPTANCE[criterion]
        passed = sum(ok for ok, _ in rows)
        verdict = "PASS" if passed == len(rows) else "FAIL"
        tr.write_line(f"{verdict}  criterion {criterion}: {passed}/{len(rows)} checks")
        for ok, detail in rows:
            if not ok:
                tr.write_line(f"        failed: {detail}")
