"""Shared fixtures for the expensive numerical objects, and the acceptance summary.

Tests marked ``@pytest.mark.criterion(n, title)`` are grouped per criterion;
the terminal summary prints one PASS/FAIL line for each.
"""

import time
from collections import OrderedDict

import numpy as np
import pytest

from hhlab.mild import PicardConfig, nonuniqueness_demo, uniqueness_cross_check
from hhlab.params import ProblemParams, SpaceParams
from hhlab.radial import RadialFunction
from hhlab.selfsimilar import shoot_profile
from hhlab.stationary import build_extension, solve_emden

_CRITERIA = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    num, title = mark.args
    entry = _CRITERIA.setdefault(num, {"title": title, "ok": True, "details": []})
    entry["ok"] = entry["ok"] and rep.passed
    for key, val in item.user_properties:
        if key == "detail":
            entry["details"].append(val)
    if not rep.passed:
        entry["details"].append(f"{item.name} {rep.outcome}")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        e = _CRITERIA[num]
        flag = "PASS" if e["ok"] else "FAIL"
        detail = "; ".join(e["details"])
        terminalreporter.write_line(f"{flag} criterion {num:2d}: {e['title']}  [{detail}]")


class Timed:
    def __init__(self, value, seconds):
        self.value = value
        self.seconds = seconds


def _timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return Timed(out, time.perf_counter() - t0)


@pytest.fixture(scope="session")
def emden():
    """Singular stationary profiles keyed by (d, gamma), with solve times."""
    cache = {}

    def get(d, gamma):
        if (d, gamma) not in cache:
            cache[(d, gamma)] = _timed(solve_emden, d, gamma)
        return cache[(d, gamma)]

    return get


@pytest.fixture(scope="session")
def extension3(emden):
    """V0 and R for d = 3, gamma = 0 on the default grid."""
    return build_extension(emden(3, 0.0).value)


@pytest.fixture(scope="session")
def double_critical():
    return ProblemParams(3, 0, 3), SpaceParams(3, 4, 0)


@pytest.fixture(scope="session")
def profile333():
    return _timed(shoot_profile, 3, 0.0, 3.0)


@pytest.fixture(scope="session")
def demo(double_critical):
    """The regular/singular pair from V0 at (d, gamma, alpha, q, r, s) = (3, 0, 3, 3, 4, 0)."""
    problem, space = double_critical
    cfg = PicardConfig.for_problem(problem, space)
    return _timed(nonuniqueness_demo, None, problem, space, cfg)


@pytest.fixture(scope="session")
def bump_data():
    """Smooth compactly concentrated data for the r = 2 runs."""
    cfg = PicardConfig.for_problem(ProblemParams(3, 0, 3), SpaceParams(3, 2, 0), T=5e-3)
    u0 = RadialFunction.from_callable(lambda r: 5.0 * np.exp(-r**2), 3, cfg.nodes)
    return u0, cfg


@pytest.fixture(scope="session")
def cross_check(bump_data):
    u0, cfg = bump_data
    return _timed(uniqueness_cross_check, u0, cfg)
