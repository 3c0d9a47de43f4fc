"""Shared test configuration and the acceptance-criteria summary.

Acceptance tests are named ``test_cNN_*``; their outcomes are collected
here and echoed as one PASS/FAIL line per criterion after the run,
together with the suite wall time.
"""

import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    max_examples=40,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

CRITERIA = {
    1: "weighted fit matches a dense simplex grid search",
    2: "analytic gradient matches central finite differences",
    3: "stacking risk is convex and solver descent is monotone",
    4: "simplex projection is idempotent, feasible, and optimal",
    5: "library oracle gets dominant weight and near-oracle accuracy",
    6: "degraded overconfident learner drags down probability averaging",
    7: "weak-learner flood hurts averaging and voting but not the fit",
    8: "dominant-likelihood posterior reduces to discrete selection",
    9: "one-hot averaging equals voting; flat posterior equals averaging",
    10: "sharpened scores keep accuracy but inflate cross-entropy",
    11: "fits, artifacts, and round-trips are bit-for-bit reproducible",
}

_t0 = time.perf_counter()
_outcomes = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    tag = name[6:8]
    if name.startswith("test_c") and tag.isdigit() and int(tag) in CRITERIA:
        _outcomes[int(tag)] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_outcomes):
        word = "PASS" if _outcomes[num] == "passed" else "FAIL"
        tr.write_line(f"[{word}] criterion {num:02d}: {CRITERIA[num]}")
    tr.write_line(
        f"suite wall time: {time.perf_counter() - _t0:.1f}s (budget 60s)"
    )


@pytest.fixture
def rng():
    return np.random.default_rng(0)
