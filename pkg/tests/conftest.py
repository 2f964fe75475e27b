import numpy as np
import pytest

from zetatherm.potentials import LocallyConstantPotential
from zetatherm.symbolic import ShiftSpec

FULL2 = ShiftSpec.full(2)
GOLDEN = ShiftSpec(2, ((0, 1), (1, 1)))


def make_fA():
    return LocallyConstantPotential.range_one([1.0, 0.0])


def make_fB():
    return LocallyConstantPotential(FULL2, 2, {(1, 1): 0.0, (1, 2): 1.0, (2, 1): 1.0, (2, 2): 0.0})


def make_const(a=0.7, d=2):
    return LocallyConstantPotential.range_one([a] * d)


def make_random(seed, d=2, m=3, spec=None, low=0.0, high=1.0):
    spec = ShiftSpec.full(d) if spec is None else spec
    rng = np.random.default_rng(seed)
    return LocallyConstantPotential.from_function(spec, m, lambda w: float(rng.uniform(low, high)))


@pytest.fixture
def fA():
    return make_fA()


@pytest.fixture
def fB():
    return make_fB()


@pytest.fixture
def fconst():
    return make_const()


@pytest.fixture
def golden():
    return GOLDEN


@pytest.fixture
def f3():
    return LocallyConstantPotential.range_one([1.0, 1.0, 0.0])


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        terminalreporter.write_line(results[k])
