import sys

import numpy as np
import pytest

from rmdlab import SpinChainParams, make_propagators


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance-gate pass/fail lines past stdout capture."""
    mod = sys.modules.get("tests.test_acceptance") or sys.modules.get(
        "test_acceptance")
    lines = getattr(mod, "RESULTS", None) if mod else None
    if lines:
        terminalreporter.section("acceptance gate")
        for line in lines:
            terminalreporter.write_line(line)

FIG2 = {"Jz": 1.0, "Jx": 0.243, "Bx": 0.809, "Bz": 0.357, "B0": 0.21}
FIG3 = {"Jz": 1.0, "Jx": 0.71, "Bx": 3.2, "Bz": 0.25, "B0": 0.21}
FIG4 = {"Jz": 1.0, "Jx": 0.315, "Bx": 0.75, "Bz": 0.21, "B0": -0.05}


def params(preset, L, inv_t):
    return SpinChainParams(J_z=preset["Jz"], J_x=preset["Jx"],
                           B_x=preset["Bx"], B_z=preset["Bz"],
                           B_0=preset["B0"], L=L, T=1.0 / inv_t)


@pytest.fixture(scope="session")
def fig2_pair_l8():
    return make_propagators(params(FIG2, 8, 20))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
