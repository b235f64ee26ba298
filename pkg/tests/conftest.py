from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


# -- acceptance summary ------------------------------------------------------
# Acceptance tests carry ``@pytest.mark.acceptance(n, "title")``; after the run
# one PASS/FAIL line per criterion is printed (a criterion passes only if all
# of its checks pass), followed by the measured values each check recorded.

_ACCEPTANCE = {}
_DETAILS = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): acceptance criterion n")


@pytest.fixture
def record(request):
    def _record(text):
        _DETAILS.append(f"{request.node.name}: {text}")
        print(text)
    return _record


def pytest_runtest_logreport(report):
    mark = _ACCEPTANCE_MARKS.get(report.nodeid)
    if mark is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        entry = _ACCEPTANCE.setdefault(mark, [])
        entry.append((report.nodeid.split("::")[-1], report.outcome))


_ACCEPTANCE_MARKS = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m is not None:
            _ACCEPTANCE_MARKS[item.nodeid] = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for (num, title), checks in sorted(_ACCEPTANCE.items()):
        ok = all(outcome == "passed" for _, outcome in checks)
        tr.write_line(f"criterion {num} [{'PASS' if ok else 'FAIL'}] {title}")
        for name, outcome in checks:
            tr.write_line(f"    {outcome.upper():7s} {name}")
    if _DETAILS:
        tr.section("acceptance measurements")
        for line in _DETAILS:
            tr.write_line(line)
