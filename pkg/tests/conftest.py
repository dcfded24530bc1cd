"""Shared fixtures plus a one-line-per-criterion acceptance summary."""

import re
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")
_outcomes = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if m is None:
        return
    key = (int(m.group(1)), m.group(2))
    if report.when == "call":
        _outcomes[key] = report.passed
    elif report.failed:
        _outcomes[key] = False


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for num, slug in sorted(_outcomes):
        verdict = "PASS" if _outcomes[(num, slug)] else "FAIL"
        label = slug.replace("_", " ")
        terminalreporter.write_line(f"criterion {num} ({label}): {verdict}")


@pytest.fixture
def rng():
    return np.random.default_rng(0)
