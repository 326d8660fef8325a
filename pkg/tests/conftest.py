from pathlib import Path

import numpy as np
import pytest

from dssa.netlist import load_netlist

DATA = Path(__file__).resolve().parents[1] / "src" / "dssa" / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def one_pole():
    return load_netlist(DATA / "one_pole.cir")


@pytest.fixture(scope="session")
def rc_ladder():
    return load_netlist(DATA / "rc_ladder.cir")


@pytest.fixture(scope="session")
def nmam():
    return load_netlist(DATA / "nmam.cir")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance verdicts, printed after the run so they land in the test log
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
