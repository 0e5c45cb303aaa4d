import os
import re
import sys
import time

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

SESSION_START = pytest.StashKey[float]()
_CRITERIA = {}


def pytest_configure(config):
    config.stash[SESSION_START] = time.time()
    config.addinivalue_line("markers", "acceptance: acceptance criteria")


def pytest_collection_modifyitems(items):
    # acceptance last, so criterion 12 measures the full run
    items.sort(key=lambda it: it.nodeid.startswith("tests/test_acceptance.py")
               or "test_acceptance.py" in it.nodeid)


def pytest_runtest_logreport(report):
    m = re.search(r"test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    if report.when == "call" or report.outcome != "passed":
        key = int(m.group(1))
        if key not in _CRITERIA or report.outcome != "passed":
            _CRITERIA[key] = (m.group(2), report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter, config):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        name, outcome, dur = _CRITERIA[k]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        tr.write_line(f"criterion {k:2d} {name:<22} {verdict}  ({dur:.1f} s)")
    tr.write_line(f"suite wall clock {time.time() - config.stash[SESSION_START]:.1f} s")
