import numpy as np
import pytest

from ahdacs.field import gen_gaussian_bumps, gen_piecewise
from ahdacs.topology import build_hierarchy, place_nodes

_ACCEPTANCE = {}


def make_network(kind="piecewise", size=400, seed=0, n=4, T=4, **field_kw):
    if kind == "piecewise":
        fld = gen_piecewise(seed=seed, **field_kw)
    elif kind == "constant":
        fld = gen_gaussian_bumps(bump_count=0, seed=seed, **field_kw)
    else:
        fld = gen_gaussian_bumps(seed=seed, **field_kw)
    nodes = place_nodes(size, 4000.0, seed=seed).with_readings(fld)
    return nodes, build_hierarchy(nodes, n, T)


@pytest.fixture
def network():
    return make_network


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the test fails on any recorded failure."""

    def record(number, passed, detail):
        _ACCEPTANCE[number] = (bool(passed), detail)
        assert passed, f"criterion {number}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
