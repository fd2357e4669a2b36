import math

import pytest

from eulerlab import fields as fl
from eulerlab import gas as gt

TWO_PI = 2.0 * math.pi


@pytest.fixture
def air53():
    return gt.GasModel(5.0 / 3.0)


def sine_snapshot(gas, n=512, amplitude=-1.0):
    grid = fl.Grid1D(0.0, TWO_PI, n)
    snap, _ = fl.sample_initial(gas, grid, fl.constant(1.0), fl.sine(amplitude))
    return snap


# acceptance results, printed once at the end of the session
ACCEPTANCE = {}


def record_criterion(number, ok, detail):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
