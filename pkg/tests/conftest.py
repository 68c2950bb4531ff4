import re

import numpy as np
import pytest

from coupled_rmdp import MdpModel, UncertaintySet


@pytest.fixture
def rng():
    return np.random.default_rng(20121)


def one_state(reward=1.0, horizon=3, discount=1.0):
    return MdpModel([[[1.0]]], [[reward]], [1.0], horizon=horizon, discount=discount)


def with_reward_vertices(model, rewards):
    """Single-state model plus extra vertices that only change the reward."""
    return UncertaintySet.from_deviations(model, [[([[1.0]], [r]) for r in rewards]])


_ACCEPTANCE = {}


@pytest.fixture
def report(request):
    """Attach a one-line measurement to an acceptance test's summary line."""
    def _report(text):
        request.node.user_properties.append(("detail", text))
    return _report


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call":
        return
    detail = "; ".join(v for k, v in item.user_properties if k == "detail")
    key = marker.args[0]
    if hasattr(item, "callspec"):
        key += f"[{item.callspec.id}]"
    _ACCEPTANCE[key] = ("PASS" if rep.passed else "FAIL", item.originalname, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: (int(re.match(r"\d+", k).group()), k)):
        status, name, detail = _ACCEPTANCE[key]
        line = f"criterion {key:<11} {status}  {name}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
