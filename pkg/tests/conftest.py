import numpy as np
import pytest

from nmrfetch import AcqParams, SpinSystem, alanine, validate
from nmrfetch.config import default_resolution

ACCEPTANCE_LINES = []


def random_system(rng, n, t2_range=(0.25, 1.0), j_range=(5.0, 80.0)):
    """Random weakly coupled system whose ancilla lines are resolvable."""
    while True:
        couplings = {}
        for k in range(1, n + 1):
            couplings[(0, k)] = rng.uniform(*j_range) * rng.choice([-1, 1])
        for j in range(1, n + 1):
            for k in range(j + 1, n + 1):
                couplings[(j, k)] = rng.uniform(-10, 10)
        offsets = {j: rng.uniform(-20, 20) for j in range(n + 1)}
        system = SpinSystem.build(n, couplings, offsets, t2=rng.uniform(*t2_range))
        params = AcqParams.auto(system)
        if validate(system, default_resolution(system, params)).ok:
            return system, params


def random_marked(rng, n):
    items = [format(i, f"0{n}b") for i in range(2**n)]
    return frozenset(b for b in items if rng.random() < 0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(20021)


@pytest.fixture
def ala():
    return alanine(t2=1.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
