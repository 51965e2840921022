import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_ACCEPTANCE = []
_DETAILS = {}


@pytest.fixture
def report(request):
    """Attach a one-line measurement to the acceptance summary."""
    def add(text):
        _DETAILS.setdefault(request.node.nodeid, []).append(text)
    return add


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when != "call" or os.path.basename(item.fspath) != "test_acceptance.py":
        return
    doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
    _ACCEPTANCE.append((item.nodeid, doc, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, doc, ok in _ACCEPTANCE:
        detail = "; ".join(_DETAILS.get(nodeid, []))
        line = f"{'PASS' if ok else 'FAIL'}  {doc}"
        terminalreporter.write_line(f"{line}  [{detail}]" if detail else line)
