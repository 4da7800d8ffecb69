import time

import numpy as np
import pytest

from camtrack.datasets import table1_points
from camtrack.synth import default_truth, make_scene

ACCEPTANCE_FILE = "test_acceptance.py"
SUITE_BUDGET_S = 60.0
_acceptance = {}
_session = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def truth():
    return default_truth()


@pytest.fixture(scope="session")
def exact_scene(truth):
    return make_scene(seed=0, noise_sigma=0.0, truth=truth)


@pytest.fixture(scope="session")
def table1():
    return table1_points()


def random_rotation(rng, max_angle=np.pi):
    from camtrack.geometry import axis_angle_to_matrix

    axis = rng.normal(size=3)
    return axis_angle_to_matrix(axis, rng.uniform(0.0, max_angle))


def pytest_sessionstart(session):
    _session["start"] = time.perf_counter()


def pytest_runtest_logreport(report):
    if ACCEPTANCE_FILE not in report.nodeid:
        return
    if report.when == "call" or report.outcome != "passed":
        detail = dict(report.user_properties).get("detail", "")
        _acceptance[report.nodeid] = (report.outcome, detail)


def _suite_runtime_ok():
    return time.perf_counter() - _session["start"] < SUITE_BUDGET_S


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (outcome, detail) in _acceptance.items():
        name = nodeid.split("::")[-1].removeprefix("test_")
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}" + (f"  [{detail}]" if detail else ""))
    elapsed = time.perf_counter() - _session["start"]
    verdict = "PASS" if elapsed < SUITE_BUDGET_S else "FAIL"
    terminalreporter.write_line(f"{verdict}  criterion_7_total_suite_runtime  [{elapsed:.1f} s < {SUITE_BUDGET_S:.0f} s]")


def pytest_sessionfinish(session, exitstatus):
    if _acceptance and not _suite_runtime_ok() and exitstatus == 0:
        session.exitstatus = 1
