import numpy as np
import pytest

from fermifuse.clifford_fock import build_fock
from fermifuse.fermion_model import build_model


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run the N=6 tier")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="slow tier; use --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


_FOCK = {}


def fock_for(n):
    if n not in _FOCK:
        _FOCK[n] = build_fock(build_model(n))
    return _FOCK[n]


@pytest.fixture(params=[2, 4])
def fock(request):
    return fock_for(request.param)


def random_vector(rng, n, real=False):
    v = rng.normal(size=n)
    return v if real else v + 1j * rng.normal(size=n)


# criterion number -> (title, passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num}. {title}: {detail}")
