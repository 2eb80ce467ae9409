import os
import sys
from collections import OrderedDict

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

_criteria: "OrderedDict[int, dict]" = OrderedDict()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    number, label = crit
    entry = _criteria.setdefault(number, {"label": label, "failed": [], "ran": 0})
    entry["ran"] += 1
    if report.failed:
        entry["failed"].append(report.nodeid.split("::")[-1])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        status = "FAIL" if entry["failed"] else "PASS"
        line = f"[{number}] {status}  {entry['label']}"
        if entry["failed"]:
            line += f"  (failing: {', '.join(entry['failed'])})"
        tr.write_line(line)
