from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"

_criteria = []


@pytest.fixture
def rng():
    return np.random.default_rng(20260415)


@pytest.fixture
def data_dir():
    return DATA


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _criteria.append((str(mark.args[0]), mark.args[1], rep.passed, item.name))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for cid, text, ok, name in sorted(_criteria, key=lambda c: (int(c[0].split(".")[0]), c[0])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {cid}: {text} [{name}]")
