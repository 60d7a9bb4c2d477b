import math

import numpy as np
import pytest
from hypothesis import strategies as st

from retrodictor.qla import DensityOperator, Ket, pvm_from_kets

S2 = 1 / math.sqrt(2)
S3 = 1 / math.sqrt(3)

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=2, max_value=6)


@pytest.fixture
def z_basis():
    return pvm_from_kets([Ket([1, 0]), Ket([0, 1])], ["z+", "z-"])


@pytest.fixture
def y_basis():
    return pvm_from_kets([Ket([S2, 1j * S2]), Ket([S2, -1j * S2])], ["y+", "y-"])


@pytest.fixture
def z_up(z_basis):
    return DensityOperator.from_ket(z_basis.ket("z+"))


@pytest.fixture
def boxes():
    e = np.eye(3)
    return pvm_from_kets([Ket(e[i]) for i in range(3)], ["box1", "box2", "box3"])


@pytest.fixture
def psi():
    return Ket([S3, S3, S3])


@pytest.fixture
def phi():
    return Ket([S3, S3, -S3])


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
