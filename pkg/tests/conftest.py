import math

import numpy as np
import pytest

from ultradiff.assoc import OmegaTable
from ultradiff.calculus.grid import Box
from ultradiff.weights import make_gevrey, make_log_family, make_q_family

SMALL_K_MAX = 20_000


@pytest.fixture(scope="session")
def g1():
    return make_gevrey(1)


@pytest.fixture(scope="session")
def g2():
    return make_gevrey(2)


@pytest.fixture(scope="session")
def n11():
    return make_log_family(1, 1)


@pytest.fixture(scope="session")
def g1_small():
    return make_gevrey(1, SMALL_K_MAX)


@pytest.fixture(scope="session")
def l2_small():
    return make_q_family(2, 200)


@pytest.fixture(scope="session")
def omega_g1(g1):
    return OmegaTable.build(g1)


@pytest.fixture(scope="session")
def std_boxes():
    """Inner and outer interval of the standard 1-D configuration."""
    return Box.cube(math.pi / 2, 3 * math.pi / 2, 1), Box.cube(math.pi / 4, 7 * math.pi / 4, 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance summary: one pass/fail line per criterion ------------------------

_ACCEPTANCE: list[tuple[str, str, float, str]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if item.get_closest_marker("acceptance") is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        _ACCEPTANCE.append((item.name, status, rep.duration, doc))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, duration, doc in sorted(_ACCEPTANCE, key=lambda r: int(r[0].split("_")[1])):
        terminalreporter.write_line(f"{status:4s}  {name:<45s} {duration:7.2f} s  {doc}")
